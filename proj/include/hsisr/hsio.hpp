#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hsisr/core_types.hpp"
#include "hsisr/resample.hpp"

namespace hsisr {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// .hsr raster: `<stem>.hdr` + `<stem>.raw`
//
// The header is exactly kHeaderBytes of ASCII text:
//
//     HSR f32 bsq le
//     bands <C>
//     lines <H>
//     samples <W>
//     data_max <v>
//
// padded with spaces and terminated by '\n'. The payload is C*H*W
// little-endian float32 values in band-sequential order. Loading divides
// every value by data_max.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kHeaderBytes = 80;
inline constexpr int kMaxRasterExtent = 99999;

struct RasterHeader {
    int bands = 0;
    int lines = 0;
    int samples = 0;
    double data_max = 1.0;
};

std::string format_header(const RasterHeader& header);
RasterHeader parse_header(const std::string& text);

/// Header and payload paths for any of `<stem>`, `<stem>.hsr`, `<stem>.hdr`, `<stem>.raw`.
fs::path header_path(const fs::path& path);
fs::path payload_path(const fs::path& path);

HsiCube load_cube(const fs::path& path);
void save_cube(const Tensor3<float>& cube, const fs::path& path);

/// 8-bit RGB PNG, scaled to [0,1].
RgbImage load_png_rgb(const fs::path& path);
/// Values are clamped to [0,1] and quantized to 8 bits.
void save_png_rgb(const Tensor3<float>& rgb, const fs::path& path);

/// Loads an RGB source from either a PNG or a 3-band raster.
RgbImage load_rgb(const fs::path& path);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class Role { labeled_train, unlabeled_train, test };

std::string to_string(Role role);
Role parse_role(const std::string& name);

struct ManifestEntry {
    std::string id;
    fs::path path;
    Role role = Role::labeled_train;
    /// Cube is already low resolution (unlabeled entries only).
    bool is_lr = false;
};

struct RgbEntry {
    std::string id;
    fs::path path;
};

struct DatasetManifest {
    fs::path root;
    std::vector<ManifestEntry> entries;
    std::vector<RgbEntry> rgb_entries;
    /// Halve RGB sources before patching (DIV2K-style ingestion).
    bool rgb_downsample2 = false;

    std::vector<const ManifestEntry*> with_role(Role role) const;
    /// Ids unique and every referenced file present.
    void validate() const;
};

/// Relative `root` is resolved against the manifest's directory, entry paths against root.
DatasetManifest load_manifest(const fs::path& path);
void save_manifest(const DatasetManifest& manifest, const fs::path& path);

struct PatchPair {
    Tensor3<float> lr;
    Tensor3<float> hr;
    std::string source_id;
    int row = 0;  // HR origin
    int col = 0;
};

/// Bicubic shrink by tau; edges must be divisible by tau.
template <typename T>
Tensor3<T> degrade(const Tensor3<T>& hr, int tau) {
    if (tau < 1) {
        throw ValidationError("tau must be >= 1");
    }
    if (hr.rows() % tau != 0 || hr.cols() % tau != 0) {
        throw ShapeError("image " + hr.shape_string() + " is not divisible by tau " + std::to_string(tau));
    }
    return bicubic_resize(hr, hr.rows() / tau, hr.cols() / tau);
}

/// Non-overlapping row-major HR tiles with their degraded LR partners.
/// Borders that do not fill a whole tile are dropped.
std::vector<PatchPair> extract_patches(const Tensor3<float>& hr, int tau, int patch_hr,
                                       const std::string& source_id = {});

/// Crops to the largest top-left window whose edges are multiples of tau.
Tensor3<float> crop_to_multiple(const Tensor3<float>& image, int tau);

/// Deterministic smooth test cubes in [0.05, 0.95].
std::vector<HsiCube> synth_dataset(int n_images, int bands, int edge, std::uint64_t seed);

/// Synthetic RGB scenes drawn from the same generator.
std::vector<RgbImage> synth_rgb_dataset(int n_images, int edge, std::uint64_t seed);

}  // namespace hsisr
