#pragma once

#include <utility>
#include <vector>

#include "hsisr/core_types.hpp"
#include "hsisr/rng.hpp"

namespace hsisr {

/// Row-stochastic C x C band mixing matrix.
struct MixingMatrix {
    int size = 0;
    std::vector<double> b;  // row-major
    std::uint64_t seed = 0;

    double operator()(int row, int col) const { return b[static_cast<std::size_t>(row) * size + col]; }
};

/// Uniform [0,1) entries, each row divided by its sum. All-zero rows are redrawn.
MixingMatrix make_mixing_matrix(int band_count, Rng& rng);

/// Per pixel: alpha * x + (1 - alpha) * B x.
Tensor3<float> mix_bands(const Tensor3<float>& cube, double alpha, const MixingMatrix& b);

/// Applies the same (alpha, B) to an LR cube and its HR partner.
std::pair<Tensor3<float>, Tensor3<float>> spectral_mixup(const Tensor3<float>& lr, const Tensor3<float>& hr,
                                                         double alpha, const MixingMatrix& b);

/// Number of interior bands inserted between (R,G) and (G,B) for a target band count.
std::pair<int, int> interior_band_counts(int target_bands);

/// Widens a 3-band image to `target_bands` bands by linear interpolation between
/// neighbouring bands; originals are kept in order. The first interval gets the
/// extra band when the split is uneven.
template <typename T>
Tensor3<T> spectral_interpolate(const Tensor3<T>& rgb, int target_bands) {
    if (rgb.channels() != 3) {
        throw ShapeError("spectral interpolation expects 3 input bands, got " + std::to_string(rgb.channels()));
    }
    if (target_bands < 3) {
        throw ValidationError("spectral interpolation needs at least 3 output bands");
    }
    const auto [first, second] = interior_band_counts(target_bands);
    Tensor3<T> out(target_bands, rgb.rows(), rgb.cols());
    int dst = 0;
    auto copy_band = [&](int src) {
        std::copy(rgb.channel(src).begin(), rgb.channel(src).end(), out.channel(dst++).begin());
    };
    auto fill_interval = [&](int lower, int interior) {
        const auto a = rgb.channel(lower);
        const auto b = rgb.channel(lower + 1);
        for (int i = 1; i <= interior; ++i) {
            const T w = static_cast<T>(i) / static_cast<T>(interior + 1);
            auto plane = out.channel(dst++);
            for (std::size_t k = 0; k < plane.size(); ++k) {
                plane[k] = (T(1) - w) * a[k] + w * b[k];
            }
        }
    };
    copy_band(0);
    fill_interval(0, first);
    copy_band(1);
    fill_interval(1, second);
    copy_band(2);
    return out;
}

}  // namespace hsisr
