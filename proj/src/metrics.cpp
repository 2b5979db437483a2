#include "hsisr/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace hsisr {

namespace {

void require_same(const Tensor3<float>& ref, const Tensor3<float>& est, const char* what) {
    ref.require_same_shape(est, what);
    if (ref.size() == 0) {
        throw ShapeError(std::string(what) + ": empty input");
    }
}

double band_mse(const Tensor3<float>& ref, const Tensor3<float>& est, int b) {
    const auto r = ref.channel(b);
    const auto e = est.channel(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = static_cast<double>(r[i]) - e[i];
        sum += d * d;
    }
    return sum / static_cast<double>(r.size());
}

double band_mean(const Tensor3<float>& x, int b) {
    double sum = 0.0;
    for (float v : x.channel(b)) {
        sum += v;
    }
    return sum / static_cast<double>(x.plane_size());
}

std::vector<double> gaussian_window_1d() {
    std::vector<double> w(kSsimWindow);
    constexpr double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (auto& v : w) {
        v /= sum;
    }
    return w;
}

/// Valid-region separable filtering of a rows x cols plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int rows, int cols, const std::vector<double>& w) {
    const int k = static_cast<int>(w.size());
    const int out_r = rows - k + 1;
    const int out_c = cols - k + 1;
    std::vector<double> tmp(static_cast<std::size_t>(rows) * out_c);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < out_c; ++c) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) {
                acc += w[static_cast<std::size_t>(t)] * plane[static_cast<std::size_t>(r) * cols + c + t];
            }
            tmp[static_cast<std::size_t>(r) * out_c + c] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_r) * out_c);
    for (int r = 0; r < out_r; ++r) {
        for (int c = 0; c < out_c; ++c) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) {
                acc += w[static_cast<std::size_t>(t)] * tmp[static_cast<std::size_t>(r + t) * out_c + c];
            }
            out[static_cast<std::size_t>(r) * out_c + c] = acc;
        }
    }
    return out;
}

double band_ssim(const Tensor3<float>& ref, const Tensor3<float>& est, int b, const std::vector<double>& w) {
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const int rows = ref.rows();
    const int cols = ref.cols();
    const std::size_t n = ref.plane_size();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    const auto rb = ref.channel(b);
    const auto eb = est.channel(b);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rb[i];
        y[i] = eb[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = filter_valid(x, rows, cols, w);
    const auto mu_y = filter_valid(y, rows, cols, w);
    const auto e_xx = filter_valid(xx, rows, cols, w);
    const auto e_yy = filter_valid(yy, rows, cols, w);
    const auto e_xy = filter_valid(xy, rows, cols, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i];
        const double my = mu_y[i];
        const double vx = e_xx[i] - mx * mx;
        const double vy = e_yy[i] - my * my;
        const double cxy = e_xy[i] - mx * my;
        sum += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return sum / static_cast<double>(mu_x.size());
}

}  // namespace

double rmse(const Tensor3<float>& ref, const Tensor3<float>& est) {
    require_same(ref, est, "rmse");
    double sum = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = static_cast<double>(ref.data()[i]) - est.data()[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(ref.size()));
}

double mpsnr(const Tensor3<float>& ref, const Tensor3<float>& est, std::vector<double>* per_band) {
    require_same(ref, est, "mpsnr");
    double sum = 0.0;
    if (per_band) {
        per_band->clear();
    }
    for (int b = 0; b < ref.channels(); ++b) {
        const double mse = band_mse(ref, est, b);
        const double psnr = mse < 1e-12 ? kPsnrCapDb : 10.0 * std::log10(1.0 / mse);
        sum += psnr;
        if (per_band) {
            per_band->push_back(psnr);
        }
    }
    return sum / ref.channels();
}

double mssim(const Tensor3<float>& ref, const Tensor3<float>& est, std::vector<double>* per_band) {
    require_same(ref, est, "mssim");
    if (ref.rows() < kSsimWindow || ref.cols() < kSsimWindow) {
        throw ShapeError("mssim: image " + ref.shape_string() + " is smaller than the 11x11 window");
    }
    const auto w = gaussian_window_1d();
    double sum = 0.0;
    if (per_band) {
        per_band->clear();
    }
    for (int b = 0; b < ref.channels(); ++b) {
        const double s = band_ssim(ref, est, b, w);
        sum += s;
        if (per_band) {
            per_band->push_back(s);
        }
    }
    return sum / ref.channels();
}

double cc(const Tensor3<float>& ref, const Tensor3<float>& est) {
    require_same(ref, est, "cc");
    double sum = 0.0;
    for (int b = 0; b < ref.channels(); ++b) {
        const double mr = band_mean(ref, b);
        const double me = band_mean(est, b);
        const auto r = ref.channel(b);
        const auto e = est.channel(b);
        double srr = 0.0, see = 0.0, sre = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double dr = r[i] - mr;
            const double de = e[i] - me;
            srr += dr * dr;
            see += de * de;
            sre += dr * de;
        }
        if (srr == 0.0 || see == 0.0) {
            sum += std::equal(r.begin(), r.end(), e.begin()) ? 1.0 : 0.0;
        } else {
            sum += sre / std::sqrt(srr * see);
        }
    }
    return sum / ref.channels();
}

double ergas(const Tensor3<float>& ref, const Tensor3<float>& est, int tau) {
    require_same(ref, est, "ergas");
    if (tau < 1) {
        throw ValidationError("ergas: tau must be >= 1");
    }
    double sum = 0.0;
    for (int b = 0; b < ref.channels(); ++b) {
        const double mu = std::max(band_mean(ref, b), 1e-8);
        const double rel = std::sqrt(band_mse(ref, est, b)) / mu;
        sum += rel * rel;
    }
    return 100.0 / tau * std::sqrt(sum / ref.channels());
}

double sam(const Tensor3<float>& ref, const Tensor3<float>& est) {
    require_same(ref, est, "sam");
    if (ref.channels() < 2) {
        throw ShapeError("sam needs at least 2 bands");
    }
    const std::size_t n = ref.plane_size();
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0, nr = 0.0, ne = 0.0;
        for (int b = 0; b < ref.channels(); ++b) {
            const double r = ref.channel(b)[i];
            const double e = est.channel(b)[i];
            dot += r * e;
            nr += r * r;
            ne += e * e;
        }
        nr = std::sqrt(nr);
        ne = std::sqrt(ne);
        if (nr < 1e-8 || ne < 1e-8) {
            continue;
        }
        sum += std::acos(std::clamp(dot / (nr * ne), -1.0, 1.0));
        ++used;
    }
    if (used == 0) {
        throw ValidationError("sam: every pixel has a zero spectrum");
    }
    return sum / static_cast<double>(used) * 180.0 / std::numbers::pi;
}

MetricReport evaluate_metrics(const Tensor3<float>& ref, const Tensor3<float>& est, int tau, bool per_band) {
    MetricReport r;
    r.tau = tau;
    r.rmse = rmse(ref, est);
    r.cc = cc(ref, est);
    r.mpsnr = mpsnr(ref, est, per_band ? &r.band_psnr : nullptr);
    r.mssim = mssim(ref, est, per_band ? &r.band_ssim : nullptr);
    r.ergas = ergas(ref, est, tau);
    r.sam = sam(ref, est);
    return r;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
    MetricReport m;
    if (reports.empty()) {
        return m;
    }
    m.tau = reports.front().tau;
    for (const auto& r : reports) {
        m.rmse += r.rmse;
        m.cc += r.cc;
        m.mpsnr += r.mpsnr;
        m.mssim += r.mssim;
        m.ergas += r.ergas;
        m.sam += r.sam;
    }
    const double n = static_cast<double>(reports.size());
    m.rmse /= n;
    m.cc /= n;
    m.mpsnr /= n;
    m.mssim /= n;
    m.ergas /= n;
    m.sam /= n;
    return m;
}

namespace {

void check_bands(const Tensor3<float>& cube, const std::array<int, 3>& bands) {
    for (int b : bands) {
        if (b < 0 || b >= cube.channels()) {
            throw ValidationError("display band " + std::to_string(b + 1) + " (1-based) is out of range for a " +
                                  std::to_string(cube.channels()) + "-band cube");
        }
    }
}

}  // namespace

ErrorMap error_map(const Tensor3<float>& ref, const Tensor3<float>& est, const std::array<int, 3>& bands,
                   double vmax) {
    ref.require_same_shape(est, "error_map");
    check_bands(ref, bands);
    ErrorMap out;
    out.values = Tensor3<float>(1, ref.rows(), ref.cols());
    double peak = 0.0;
    for (int r = 0; r < ref.rows(); ++r) {
        for (int c = 0; c < ref.cols(); ++c) {
            double acc = 0.0;
            for (int b : bands) {
                acc += std::abs(static_cast<double>(ref(b, r, c)) - est(b, r, c));
            }
            const double v = acc / 3.0;
            out.values(0, r, c) = static_cast<float>(v);
            peak = std::max(peak, v);
        }
    }
    out.vmax = vmax > 0.0 ? vmax : peak;
    out.heat = Tensor3<float>(3, ref.rows(), ref.cols());
    for (int r = 0; r < ref.rows(); ++r) {
        for (int c = 0; c < ref.cols(); ++c) {
            const double t = out.vmax > 0.0 ? std::clamp(out.values(0, r, c) / out.vmax, 0.0, 1.0) : 0.0;
            // black -> red -> yellow -> white
            out.heat(0, r, c) = static_cast<float>(std::clamp(3.0 * t, 0.0, 1.0));
            out.heat(1, r, c) = static_cast<float>(std::clamp(3.0 * t - 1.0, 0.0, 1.0));
            out.heat(2, r, c) = static_cast<float>(std::clamp(3.0 * t - 2.0, 0.0, 1.0));
        }
    }
    return out;
}

Tensor3<float> render_bands(const Tensor3<float>& cube, const std::array<int, 3>& bands) {
    check_bands(cube, bands);
    Tensor3<float> out(3, cube.rows(), cube.cols());
    for (int k = 0; k < 3; ++k) {
        const auto src = cube.channel(bands[static_cast<std::size_t>(k)]);
        std::copy(src.begin(), src.end(), out.channel(k).begin());
    }
    return out;
}

namespace {

constexpr const char* kMetricNames[] = {"rmse", "cc", "mpsnr", "mssim", "ergas", "sam"};

std::array<double, 6> as_array(const MetricReport& r) {
    return {r.rmse, r.cc, r.mpsnr, r.mssim, r.ergas, r.sam};
}

}  // namespace

void write_metrics_csv(const std::vector<NamedReport>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "id";
    for (const char* name : kMetricNames) out << "," << name;
    for (const char* name : kMetricNames) out << ",bicubic_" << name;
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        out << row.id;
        for (double v : as_array(row.model)) {
            std::snprintf(buf, sizeof buf, ",%.10g", v);
            out << buf;
        }
        for (double v : as_array(row.bicubic)) {
            std::snprintf(buf, sizeof buf, ",%.10g", v);
            out << buf;
        }
        out << "\n";
    }
}

void write_metrics_summary(const std::vector<NamedReport>& rows, const std::filesystem::path& path) {
    std::vector<MetricReport> model, bicubic;
    for (const auto& r : rows) {
        model.push_back(r.model);
        bicubic.push_back(r.bicubic);
    }
    auto to_json = [](const MetricReport& m) {
        nlohmann::json j;
        const auto v = as_array(m);
        for (std::size_t i = 0; i < v.size(); ++i) {
            j[kMetricNames[i]] = v[i];
        }
        return j;
    };
    nlohmann::json j;
    j["images"] = rows.size();
    j["tau"] = rows.empty() ? 0 : rows.front().model.tau;
    j["model_mean"] = to_json(mean_report(model));
    j["bicubic_mean"] = to_json(mean_report(bicubic));
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

}  // namespace hsisr
