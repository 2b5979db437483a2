#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hsisr/core_types.hpp"

namespace hsisr {

/// Sampled R/G/B sensitivity curves.
struct ResponseCurves {
    std::vector<double> wavelengths_nm;
    std::vector<double> r, g, b;
};

/// Camera response resampled at the cube's band centres; each row sums to 1.
struct CrfMatrix {
    std::vector<double> f;  // 3 x bands, row-major
    std::vector<double> band_centers_nm;
    std::string camera_name;

    int bands() const { return static_cast<int>(band_centers_nm.size()); }
    double operator()(int channel, int band) const { return f[static_cast<std::size_t>(channel) * bands() + band]; }
};

/// Text format: header `# wavelengths_nm r g b`, then rows `lambda r g b`.
ResponseCurves parse_response_curves(std::istream& in);

/// Linear resampling at `band_centers_nm`, then row normalization.
CrfMatrix make_crf(const ResponseCurves& curves, const std::vector<double>& band_centers_nm,
                   std::string camera_name = {});

CrfMatrix load_crf(const std::filesystem::path& path, const std::vector<double>& band_centers_nm);

/// Evenly spaced centres from first_nm to last_nm inclusive.
std::vector<double> band_centers(int bands, double first_nm, double last_nm);

/// rgb(k, pixel) = sum_b f(k, b) * cube(b, pixel).
template <typename T>
Tensor3<T> project_to_rgb(const Tensor3<T>& cube, const CrfMatrix& crf) {
    if (cube.channels() != crf.bands()) {
        throw ShapeError("CRF has " + std::to_string(crf.bands()) + " bands but cube has " +
                         std::to_string(cube.channels()));
    }
    Tensor3<T> out(3, cube.rows(), cube.cols());
    for (int k = 0; k < 3; ++k) {
        auto dst = out.channel(k);
        for (int b = 0; b < cube.channels(); ++b) {
            const T w = static_cast<T>(crf(k, b));
            const auto src = cube.channel(b);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                dst[i] += w * src[i];
            }
        }
    }
    return out;
}

/// Adjoint of project_to_rgb: maps an RGB gradient back onto the bands.
template <typename T>
Tensor3<T> project_to_rgb_adjoint(const Tensor3<T>& grad_rgb, const CrfMatrix& crf) {
    if (grad_rgb.channels() != 3) {
        throw ShapeError("RGB gradient must have 3 channels");
    }
    Tensor3<T> out(crf.bands(), grad_rgb.rows(), grad_rgb.cols());
    for (int b = 0; b < crf.bands(); ++b) {
        auto dst = out.channel(b);
        for (int k = 0; k < 3; ++k) {
            const T w = static_cast<T>(crf(k, b));
            const auto src = grad_rgb.channel(k);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                dst[i] += w * src[i];
            }
        }
    }
    return out;
}

}  // namespace hsisr
