#pragma once

// Straightforward reference implementations of the quality metrics, written
// directly from their definitions with no shared code paths.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsisr/tensor.hpp"

namespace oracle {

using hsisr::Tensor3;

inline double rmse(const Tensor3<float>& a, const Tensor3<float>& b) {
    long double s = 0;
    for (int k = 0; k < a.channels(); ++k)
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c) {
                const long double d = static_cast<long double>(a(k, r, c)) - b(k, r, c);
                s += d * d;
            }
    return static_cast<double>(std::sqrt(s / (a.channels() * a.rows() * a.cols())));
}

inline double band_mse(const Tensor3<float>& a, const Tensor3<float>& b, int k) {
    long double s = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) {
            const long double d = static_cast<long double>(a(k, r, c)) - b(k, r, c);
            s += d * d;
        }
    return static_cast<double>(s / (a.rows() * a.cols()));
}

inline double band_mean(const Tensor3<float>& a, int k) {
    long double s = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) s += a(k, r, c);
    return static_cast<double>(s / (a.rows() * a.cols()));
}

inline double mpsnr(const Tensor3<float>& a, const Tensor3<float>& b) {
    double s = 0;
    for (int k = 0; k < a.channels(); ++k) {
        const double m = band_mse(a, b, k);
        s += m < 1e-12 ? 120.0 : -10.0 * std::log10(m);
    }
    return s / a.channels();
}

inline double cc(const Tensor3<float>& a, const Tensor3<float>& b) {
    double s = 0;
    for (int k = 0; k < a.channels(); ++k) {
        const double ma = band_mean(a, k), mb = band_mean(b, k);
        long double ab = 0, aa = 0, bb = 0;
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c) {
                const long double x = a(k, r, c) - ma, y = b(k, r, c) - mb;
                ab += x * y;
                aa += x * x;
                bb += y * y;
            }
        s += static_cast<double>(ab / std::sqrt(aa * bb));
    }
    return s / a.channels();
}

inline double ergas(const Tensor3<float>& a, const Tensor3<float>& b, int tau) {
    double s = 0;
    for (int k = 0; k < a.channels(); ++k) {
        const double mu = band_mean(a, k);
        s += band_mse(a, b, k) / (mu * mu);
    }
    return 100.0 / tau * std::sqrt(s / a.channels());
}

inline double sam(const Tensor3<float>& a, const Tensor3<float>& b) {
    double s = 0;
    int n = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) {
            long double ab = 0, aa = 0, bb = 0;
            for (int k = 0; k < a.channels(); ++k) {
                ab += static_cast<long double>(a(k, r, c)) * b(k, r, c);
                aa += static_cast<long double>(a(k, r, c)) * a(k, r, c);
                bb += static_cast<long double>(b(k, r, c)) * b(k, r, c);
            }
            if (aa == 0 || bb == 0) continue;
            const long double cosv = std::clamp<long double>(ab / std::sqrt(aa * bb), -1, 1);
            s += static_cast<double>(std::acos(cosv));
            ++n;
        }
    return s / n * 180.0 / std::numbers::pi;
}

/// Full 2D 11x11 Gaussian window at every valid position.
inline double mssim(const Tensor3<float>& a, const Tensor3<float>& b) {
    constexpr int win = 11;
    constexpr double sigma = 1.5;
    double w[win][win];
    double wsum = 0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - 5, dj = j - 5;
            w[i][j] = std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
            wsum += w[i][j];
        }
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0;
    for (int k = 0; k < a.channels(); ++k) {
        double band = 0;
        int count = 0;
        for (int r0 = 0; r0 + win <= a.rows(); ++r0)
            for (int c0 = 0; c0 + win <= a.cols(); ++c0) {
                double mx = 0, my = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        mx += w[i][j] / wsum * a(k, r0 + i, c0 + j);
                        my += w[i][j] / wsum * b(k, r0 + i, c0 + j);
                    }
                double vx = 0, vy = 0, cxy = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        const double dx = a(k, r0 + i, c0 + j) - mx;
                        const double dy = b(k, r0 + i, c0 + j) - my;
                        vx += w[i][j] / wsum * dx * dx;
                        vy += w[i][j] / wsum * dy * dy;
                        cxy += w[i][j] / wsum * dx * dy;
                    }
                band += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++count;
            }
        total += band / count;
    }
    return total / a.channels();
}

}  // namespace oracle
