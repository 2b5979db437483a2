#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsisr/tensor.hpp"

namespace hsisr {

/// Hyperspectral cube, axis order (band, row, col), values in [0,1] after ingestion.
class HsiCube : public Tensor3<float> {
public:
    HsiCube() = default;
    HsiCube(int bands, int rows, int cols, float fill = 0.0f) : Tensor3<float>(bands, rows, cols, fill) {}
    explicit HsiCube(Tensor3<float> data) : Tensor3<float>(std::move(data)) {}

    int bands() const noexcept { return channels(); }

    /// Optional spectral extent (start_nm, end_nm).
    std::optional<std::pair<double, double>> band_range_nm;
};

/// Three-band (R, G, B) image in [0,1].
class RgbImage : public Tensor3<float> {
public:
    static constexpr int kBands = 3;

    RgbImage() : Tensor3<float>(kBands, 0, 0) {}
    RgbImage(int rows, int cols, float fill = 0.0f) : Tensor3<float>(kBands, rows, cols, fill) {}
    explicit RgbImage(Tensor3<float> data) : Tensor3<float>(std::move(data)) {
        if (channels() != kBands) {
            throw ShapeError("RGB image needs exactly 3 bands, got " + std::to_string(channels()));
        }
    }
};

struct ScaleConfig {
    int tau = 4;
    int patch_hr = 64;

    void validate() const;
};

/// Overlapping windows of `group_size` consecutive bands covering [0, band_count).
struct GroupPlan {
    int band_count = 0;
    int group_size = 0;
    int stride = 0;
    std::vector<int> starts;

    /// Number of groups covering each band.
    std::vector<int> coverage() const;
    void validate() const;
};

/// Builds starts 0, S, 2S, ... with S = group_size - overlap, clamping the last
/// start to band_count - group_size so the final group ends on the last band.
GroupPlan make_group_plan(int band_count, int group_size, int overlap);

enum class Term { hsi, rgb, mixup, ssl };

std::string_view to_string(Term term);
Term parse_term(std::string_view name);

struct BatchCounts {
    int hsi = 1;
    int rgb = 3;
    int mixup = 2;
    int ssl = 3;

    int count(Term term) const;
    int total() const { return hsi + rgb + mixup + ssl; }
};

struct TrainConfig {
    double lr_initial = 1e-4;
    double lr_decay = 0.3;
    int lr_decay_every_epochs = 3;
    int epochs = 10;
    /// 0 selects 16, or 8 when the SSL term is active.
    int batch_size = 0;
    BatchCounts batches_per_iter;
    std::array<Term, 4> term_order{Term::hsi, Term::rgb, Term::mixup, Term::ssl};
    double alpha_mixup = 0.5;
    /// Multiplier on the SSTV part of every composite loss.
    double sstv_weight = 1.0;
    int feature_width = 32;
    std::uint64_t seed = 0;
    /// Stop after this many iterations when > 0.
    int max_iterations = 0;
    bool ssl_include_sstv = true;
    bool ssl_detach_rgb = false;

    int effective_batch_size() const;
    void validate() const;
};

enum class ViolationKind { non_finite, out_of_range, shape };

struct Violation {
    ViolationKind kind;
    std::string message;
    int band = -1;
    int row = -1;
    int col = -1;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks the cube invariants. Reports at most `max_reports` element violations.
ValidationResult validate_cube(const Tensor3<float>& cube, std::size_t max_reports = 16);

}  // namespace hsisr
