#include "hsisr/augment.hpp"

namespace hsisr {

MixingMatrix make_mixing_matrix(int band_count, Rng& rng) {
    if (band_count < 1) {
        throw ValidationError("mixing matrix needs band_count >= 1");
    }
    MixingMatrix m;
    m.size = band_count;
    m.b.resize(static_cast<std::size_t>(band_count) * band_count);
    for (int r = 0; r < band_count; ++r) {
        double* row = &m.b[static_cast<std::size_t>(r) * band_count];
        double sum = 0.0;
        while (sum <= 0.0) {
            sum = 0.0;
            for (int c = 0; c < band_count; ++c) {
                row[c] = uniform01(rng);
                sum += row[c];
            }
        }
        for (int c = 0; c < band_count; ++c) {
            row[c] /= sum;
        }
    }
    return m;
}

Tensor3<float> mix_bands(const Tensor3<float>& cube, double alpha, const MixingMatrix& b) {
    if (cube.channels() != b.size) {
        throw ShapeError("mixing matrix is " + std::to_string(b.size) + "x" + std::to_string(b.size) +
                         " but cube has " + std::to_string(cube.channels()) + " bands");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ValidationError("mixup alpha must lie in [0,1]");
    }
    const int bands = cube.channels();
    const std::size_t plane = cube.plane_size();
    Tensor3<float> out(bands, cube.rows(), cube.cols());
    std::vector<double> acc(plane);
    for (int r = 0; r < bands; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int c = 0; c < bands; ++c) {
            const double w = (1.0 - alpha) * b(r, c) + (r == c ? alpha : 0.0);
            if (w == 0.0) {
                continue;
            }
            const auto src = cube.channel(c);
            for (std::size_t k = 0; k < plane; ++k) {
                acc[k] += w * src[k];
            }
        }
        auto dst = out.channel(r);
        for (std::size_t k = 0; k < plane; ++k) {
            dst[k] = static_cast<float>(acc[k]);
        }
    }
    return out;
}

std::pair<Tensor3<float>, Tensor3<float>> spectral_mixup(const Tensor3<float>& lr, const Tensor3<float>& hr,
                                                         double alpha, const MixingMatrix& b) {
    if (lr.channels() != hr.channels()) {
        throw ShapeError("mixup LR/HR band counts differ: " + std::to_string(lr.channels()) + " vs " +
                         std::to_string(hr.channels()));
    }
    return {mix_bands(lr, alpha, b), mix_bands(hr, alpha, b)};
}

std::pair<int, int> interior_band_counts(int target_bands) {
    if (target_bands < 3) {
        throw ValidationError("spectral interpolation needs at least 3 output bands");
    }
    const int interior = target_bands - 3;
    return {(interior + 1) / 2, interior / 2};
}

}  // namespace hsisr
