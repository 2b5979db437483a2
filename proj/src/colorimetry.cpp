#include "hsisr/colorimetry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hsisr {

ResponseCurves parse_response_curves(std::istream& in) {
    ResponseCurves curves;
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        if (line.front() == '#') {
            std::istringstream h(line.substr(1));
            std::string a, b, c, d;
            h >> a >> b >> c >> d;
            if (a == "wavelengths_nm" && b == "r" && c == "g" && d == "b") {
                header_seen = true;
            }
            continue;
        }
        if (!header_seen) {
            throw IoError("CRF table is missing the '# wavelengths_nm r g b' header");
        }
        std::istringstream row(line);
        double lambda, r, g, b;
        if (!(row >> lambda >> r >> g >> b)) {
            throw IoError("CRF table line " + std::to_string(line_no) + " is malformed");
        }
        if (!curves.wavelengths_nm.empty() && lambda <= curves.wavelengths_nm.back()) {
            throw IoError("CRF wavelengths must increase (line " + std::to_string(line_no) + ")");
        }
        if (r < 0 || g < 0 || b < 0) {
            throw IoError("CRF sensitivities must be non-negative (line " + std::to_string(line_no) + ")");
        }
        curves.wavelengths_nm.push_back(lambda);
        curves.r.push_back(r);
        curves.g.push_back(g);
        curves.b.push_back(b);
    }
    if (curves.wavelengths_nm.size() < 2) {
        throw IoError("CRF table needs at least two samples");
    }
    return curves;
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) {
        return ys.back();
    }
    const auto i = static_cast<std::size_t>(it - xs.begin());
    if (*it == x || i == 0) {
        return ys[i];
    }
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - t) * ys[i - 1] + t * ys[i];
}

}  // namespace

CrfMatrix make_crf(const ResponseCurves& curves, const std::vector<double>& centers, std::string camera_name) {
    if (centers.empty()) {
        throw ValidationError("CRF needs at least one band centre");
    }
    const double lo = curves.wavelengths_nm.front();
    const double hi = curves.wavelengths_nm.back();
    std::string offending;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (centers[i] < lo || centers[i] > hi) {
            std::ostringstream os;
            os << (offending.empty() ? "" : ", ") << "band " << i << " (" << centers[i] << " nm)";
            offending += os.str();
        }
    }
    if (!offending.empty()) {
        std::ostringstream os;
        os << "unsupported wavelength: CRF covers [" << lo << ", " << hi << "] nm but requested " << offending;
        throw ValidationError(os.str());
    }
    CrfMatrix crf;
    crf.band_centers_nm = centers;
    crf.camera_name = std::move(camera_name);
    const auto n = centers.size();
    crf.f.resize(3 * n);
    const std::vector<double>* rows[3] = {&curves.r, &curves.g, &curves.b};
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            const double v = interpolate(curves.wavelengths_nm, *rows[k], centers[b]);
            crf.f[k * n + b] = v;
            sum += v;
        }
        if (!(sum > 0.0)) {
            throw ValidationError("CRF channel " + std::to_string(k) + " has zero response over the requested bands");
        }
        for (std::size_t b = 0; b < n; ++b) {
            crf.f[k * n + b] /= sum;
        }
    }
    return crf;
}

CrfMatrix load_crf(const std::filesystem::path& path, const std::vector<double>& band_centers_nm) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open CRF table " + path.string());
    }
    return make_crf(parse_response_curves(in), band_centers_nm, path.stem().string());
}

std::vector<double> band_centers(int bands, double first_nm, double last_nm) {
    if (bands < 1) {
        throw ValidationError("band count must be >= 1");
    }
    std::vector<double> out(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) {
        out[static_cast<std::size_t>(b)] =
            bands == 1 ? first_nm : first_nm + (last_nm - first_nm) * b / (bands - 1);
    }
    return out;
}

}  // namespace hsisr
