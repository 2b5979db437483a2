#pragma once

#include <cmath>
#include <vector>

#include "hsisr/tensor.hpp"

namespace hsisr {

/// Keys cubic convolution kernel with a = -0.5.
inline double keys_kernel(double x) {
    constexpr double a = -0.5;
    const double ax = std::abs(x);
    if (ax <= 1.0) {
        return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
    }
    if (ax < 2.0) {
        return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
    }
    return 0.0;
}

/// Half-sample symmetric reflection of an index into [0, n).
inline int reflect_index(int i, int n) {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * n;
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - 1 - i;
}

/// Sparse interpolation weights along one axis.
struct ResampleAxis {
    int in_size = 0;
    int out_size = 0;
    int taps = 0;
    std::vector<int> index;      // out_size * taps
    std::vector<double> weight;  // out_size * taps
};

/// Output sample i sits at input coordinate (i + 0.5) / scale - 0.5.
/// When shrinking, the kernel is stretched by 1/scale (antialiasing).
ResampleAxis make_resample_axis(int in_size, int out_size, bool antialias = true);

/// Separable bicubic resampling of every channel to out_rows x out_cols.
template <typename T>
Tensor3<T> bicubic_resize(const Tensor3<T>& image, int out_rows, int out_cols, bool antialias = true) {
    if (out_rows < 1 || out_cols < 1) {
        throw ValidationError("resize target must be at least 1x1");
    }
    if (image.rows() < 1 || image.cols() < 1) {
        throw ShapeError("cannot resize an empty image");
    }
    const ResampleAxis vert = make_resample_axis(image.rows(), out_rows, antialias);
    const ResampleAxis horz = make_resample_axis(image.cols(), out_cols, antialias);

    Tensor3<T> out(image.channels(), out_rows, out_cols);
    std::vector<double> tmp(static_cast<std::size_t>(out_rows) * image.cols());
    for (int ch = 0; ch < image.channels(); ++ch) {
        // rows first
        for (int r = 0; r < out_rows; ++r) {
            double* dst = &tmp[static_cast<std::size_t>(r) * image.cols()];
            std::fill(dst, dst + image.cols(), 0.0);
            for (int t = 0; t < vert.taps; ++t) {
                const std::size_t k = static_cast<std::size_t>(r) * vert.taps + t;
                const double w = vert.weight[k];
                if (w == 0.0) {
                    continue;
                }
                const T* src = &image(ch, vert.index[k], 0);
                for (int c = 0; c < image.cols(); ++c) {
                    dst[c] += w * static_cast<double>(src[c]);
                }
            }
        }
        for (int r = 0; r < out_rows; ++r) {
            const double* src = &tmp[static_cast<std::size_t>(r) * image.cols()];
            T* dst = &out(ch, r, 0);
            for (int c = 0; c < out_cols; ++c) {
                double acc = 0.0;
                for (int t = 0; t < horz.taps; ++t) {
                    const std::size_t k = static_cast<std::size_t>(c) * horz.taps + t;
                    acc += horz.weight[k] * src[horz.index[k]];
                }
                dst[c] = static_cast<T>(acc);
            }
        }
    }
    return out;
}

}  // namespace hsisr
