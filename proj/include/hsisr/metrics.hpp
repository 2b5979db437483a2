#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hsisr/core_types.hpp"

namespace hsisr {

inline constexpr double kPsnrCapDb = 120.0;
inline constexpr int kSsimWindow = 11;

struct MetricReport {
    double rmse = 0.0;
    double cc = 0.0;
    double mpsnr = 0.0;
    double mssim = 0.0;
    double ergas = 0.0;
    double sam = 0.0;  // degrees
    std::vector<double> band_psnr;
    std::vector<double> band_ssim;
    int tau = 1;
};

double rmse(const Tensor3<float>& ref, const Tensor3<float>& est);

/// Mean over bands of 10 log10(1 / MSE_b); bands with MSE_b < 1e-12 count as 120 dB.
double mpsnr(const Tensor3<float>& ref, const Tensor3<float>& est, std::vector<double>* per_band = nullptr);

/// Mean over bands of SSIM (11x11 Gaussian window, sigma 1.5, K1 0.01, K2 0.03, L 1,
/// valid region only).
double mssim(const Tensor3<float>& ref, const Tensor3<float>& est, std::vector<double>* per_band = nullptr);

/// Mean over bands of Pearson correlation.
double cc(const Tensor3<float>& ref, const Tensor3<float>& est);

/// (100 / tau) sqrt(mean_b (RMSE_b / mu_b)^2), mu_b the reference band mean.
double ergas(const Tensor3<float>& ref, const Tensor3<float>& est, int tau);

/// Mean spectral angle in degrees over pixels whose spectra are not ~0.
double sam(const Tensor3<float>& ref, const Tensor3<float>& est);

MetricReport evaluate_metrics(const Tensor3<float>& ref, const Tensor3<float>& est, int tau,
                              bool per_band = false);

/// Element-wise mean of the scalar metrics.
MetricReport mean_report(const std::vector<MetricReport>& reports);

/// 0-based (5th, 15th, 25th) display bands.
inline constexpr std::array<int, 3> kDefaultDisplayBands{4, 14, 24};

struct ErrorMap {
    Tensor3<float> values;  // (1, rows, cols)
    Tensor3<float> heat;    // (3, rows, cols) colour rendering in [0,1]
    double vmax = 0.0;
};

/// Per pixel, the mean over the three bands of |ref - est|. The heat image maps
/// 0 to black and `vmax` (the map maximum when vmax <= 0) to white.
ErrorMap error_map(const Tensor3<float>& ref, const Tensor3<float>& est, const std::array<int, 3>& bands,
                   double vmax = 0.0);

/// Three bands stacked as R, G, B.
Tensor3<float> render_bands(const Tensor3<float>& cube, const std::array<int, 3>& bands);

// Serialization

struct NamedReport {
    std::string id;
    MetricReport model;
    MetricReport bicubic;
};

/// Header `id,rmse,cc,mpsnr,mssim,ergas,sam,bicubic_rmse,...`.
void write_metrics_csv(const std::vector<NamedReport>& rows, const std::filesystem::path& path);
void write_metrics_summary(const std::vector<NamedReport>& rows, const std::filesystem::path& path);

}  // namespace hsisr
