#include "hsisr/hsio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <png.h>

#include "hsisr/rng.hpp"
#include "json.hpp"

namespace hsisr {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

void to_little_endian(std::vector<float>& values) {
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& v : values) {
            auto bits = std::bit_cast<std::uint32_t>(v);
            v = std::bit_cast<float>(byteswap32(bits));
        }
    }
}

fs::path strip_raster_extension(const fs::path& path) {
    const auto ext = path.extension();
    if (ext == ".hdr" || ext == ".raw" || ext == ".hsr") {
        auto stem = path;
        stem.replace_extension();
        return stem;
    }
    return path;
}

}  // namespace

std::string format_header(const RasterHeader& h) {
    if (h.bands < 1 || h.lines < 1 || h.samples < 1 || h.bands > kMaxRasterExtent ||
        h.lines > kMaxRasterExtent || h.samples > kMaxRasterExtent) {
        throw ValidationError("raster extents must lie in [1, 99999]");
    }
    if (!(h.data_max > 0.0) || !std::isfinite(h.data_max)) {
        throw ValidationError("data_max must be positive and finite");
    }
    char max_text[32];
    std::snprintf(max_text, sizeof max_text, "%.9g", h.data_max);
    std::string text = "HSR f32 bsq le\nbands " + std::to_string(h.bands) + "\nlines " +
                       std::to_string(h.lines) + "\nsamples " + std::to_string(h.samples) +
                       "\ndata_max " + max_text + "\n";
    if (text.size() > kHeaderBytes - 1) {
        throw ValidationError("raster header does not fit in 80 bytes");
    }
    text.append(kHeaderBytes - 1 - text.size(), ' ');
    text.push_back('\n');
    return text;
}

RasterHeader parse_header(const std::string& text) {
    std::istringstream in(text);
    std::string magic[4];
    in >> magic[0] >> magic[1] >> magic[2] >> magic[3];
    if (!in || magic[0] != "HSR" || magic[1] != "f32" || magic[2] != "bsq" || magic[3] != "le") {
        throw IoError("malformed header: expected 'HSR f32 bsq le'");
    }
    RasterHeader h;
    h.bands = h.lines = h.samples = -1;
    h.data_max = -1.0;
    std::string key;
    while (in >> key) {
        if (key == "bands") {
            in >> h.bands;
        } else if (key == "lines") {
            in >> h.lines;
        } else if (key == "samples") {
            in >> h.samples;
        } else if (key == "data_max") {
            in >> h.data_max;
        } else {
            throw IoError("malformed header: unknown key '" + key + "'");
        }
        if (!in) {
            throw IoError("malformed header: bad value for '" + key + "'");
        }
    }
    if (h.bands < 1 || h.lines < 1 || h.samples < 1 || !(h.data_max > 0.0)) {
        throw IoError("malformed header: missing or invalid bands/lines/samples/data_max");
    }
    return h;
}

fs::path header_path(const fs::path& path) {
    auto p = strip_raster_extension(path);
    p += ".hdr";
    return p;
}

fs::path payload_path(const fs::path& path) {
    auto p = strip_raster_extension(path);
    p += ".raw";
    return p;
}

HsiCube load_cube(const fs::path& path) {
    const auto hdr = header_path(path);
    std::ifstream hin(hdr, std::ios::binary);
    if (!hin) {
        throw IoError("cannot open header " + hdr.string());
    }
    std::string text((std::istreambuf_iterator<char>(hin)), std::istreambuf_iterator<char>());
    const RasterHeader h = parse_header(text);

    const auto raw = payload_path(path);
    std::ifstream pin(raw, std::ios::binary | std::ios::ate);
    if (!pin) {
        throw IoError("cannot open payload " + raw.string());
    }
    const auto bytes = static_cast<std::uintmax_t>(pin.tellg());
    const std::uintmax_t expected = static_cast<std::uintmax_t>(h.bands) * h.lines * h.samples * 4u;
    if (bytes != expected) {
        throw IoError("payload size mismatch in " + raw.string() + ": header declares " +
                      std::to_string(expected) + " bytes, file has " + std::to_string(bytes));
    }
    pin.seekg(0);
    std::vector<float> values(expected / 4);
    pin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
    if (!pin) {
        throw IoError("short read on " + raw.string());
    }
    to_little_endian(values);
    const auto scale = static_cast<float>(1.0 / h.data_max);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw IoError("non-finite payload value at element " + std::to_string(i) + " of " + raw.string());
        }
        if (h.data_max != 1.0) {
            values[i] *= scale;
        }
    }
    return HsiCube(Tensor3<float>(h.bands, h.lines, h.samples, std::move(values)));
}

void save_cube(const Tensor3<float>& cube, const fs::path& path) {
    RasterHeader h{cube.channels(), cube.rows(), cube.cols(), 1.0};
    const std::string text = format_header(h);
    const auto hdr = header_path(path);
    const auto raw = payload_path(path);
    {
        std::ofstream out(hdr, std::ios::binary | std::ios::trunc);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) {
            throw IoError("cannot write header " + hdr.string());
        }
    }
    std::vector<float> values = cube.values();
    to_little_endian(values);
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!out) {
        throw IoError("cannot write payload " + raw.string());
    }
}

RgbImage load_png_rgb(const fs::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    const int rows = static_cast<int>(image.height);
    const int cols = static_cast<int>(image.width);
    RgbImage rgb(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                rgb(ch, r, c) = buffer[(static_cast<std::size_t>(r) * cols + c) * 3 + ch] / 255.0f;
            }
        }
    }
    return rgb;
}

void save_png_rgb(const Tensor3<float>& rgb, const fs::path& path) {
    if (rgb.channels() != 3) {
        throw ShapeError("PNG output needs 3 channels, got " + std::to_string(rgb.channels()));
    }
    const int rows = rgb.rows();
    const int cols = rgb.cols();
    std::vector<png_byte> buffer(static_cast<std::size_t>(rows) * cols * 3);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                const float v = std::clamp(rgb(ch, r, c), 0.0f, 1.0f);
                buffer[(static_cast<std::size_t>(r) * cols + c) * 3 + ch] =
                    static_cast<png_byte>(std::lround(v * 255.0f));
            }
        }
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(cols);
    image.height = static_cast<png_uint_32>(rows);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

RgbImage load_rgb(const fs::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") {
        return load_png_rgb(path);
    }
    return RgbImage(static_cast<Tensor3<float>>(load_cube(path)));
}

// ---------------------------------------------------------------------------

std::string to_string(Role role) {
    switch (role) {
        case Role::labeled_train: return "labeled_train";
        case Role::unlabeled_train: return "unlabeled_train";
        case Role::test: return "test";
    }
    return "?";
}

Role parse_role(const std::string& name) {
    if (name == "labeled_train") return Role::labeled_train;
    if (name == "unlabeled_train") return Role::unlabeled_train;
    if (name == "test") return Role::test;
    throw ValidationError("unknown dataset role '" + name + "'");
}

std::vector<const ManifestEntry*> DatasetManifest::with_role(Role role) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
        if (e.role == role) {
            out.push_back(&e);
        }
    }
    return out;
}

void DatasetManifest::validate() const {
    std::set<std::string> ids;
    auto check = [&](const std::string& id, const fs::path& p, bool raster) {
        if (!ids.insert(id).second) {
            throw ValidationError("duplicate manifest id '" + id + "'");
        }
        const bool present = raster ? fs::exists(header_path(p)) && fs::exists(payload_path(p)) : fs::exists(p);
        if (!present) {
            throw ValidationError("manifest entry '" + id + "' references missing file " + p.string());
        }
    };
    for (const auto& e : entries) {
        check(e.id, e.path, true);
    }
    for (const auto& e : rgb_entries) {
        auto ext = e.path.extension().string();
        check(e.id, e.path, ext != ".png" && ext != ".PNG");
    }
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    static const std::set<std::string> top_keys{"root", "entries", "rgb_entries", "rgb_downsample2"};
    for (const auto& [key, _] : j.items()) {
        if (!top_keys.contains(key)) {
            throw ValidationError("manifest: unknown key '" + key + "'");
        }
    }
    DatasetManifest m;
    fs::path root = j.value("root", std::string("."));
    if (root.is_relative()) {
        root = path.parent_path() / root;
    }
    m.root = root.lexically_normal();
    m.rgb_downsample2 = j.value("rgb_downsample2", false);
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_relative() ? (m.root / fp).lexically_normal() : fp;
    };
    try {
        for (const auto& e : j.value("entries", nlohmann::json::array())) {
            ManifestEntry entry;
            entry.id = e.at("id").get<std::string>();
            entry.path = resolve(e.at("path").get<std::string>());
            entry.role = parse_role(e.at("role").get<std::string>());
            entry.is_lr = e.value("is_lr", false);
            m.entries.push_back(std::move(entry));
        }
        for (const auto& e : j.value("rgb_entries", nlohmann::json::array())) {
            m.rgb_entries.push_back({e.at("id").get<std::string>(), resolve(e.at("path").get<std::string>())});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest " + path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
    nlohmann::json j;
    j["root"] = m.root.string();
    j["rgb_downsample2"] = m.rgb_downsample2;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : m.entries) {
        nlohmann::json row{{"id", e.id}, {"path", e.path.string()}, {"role", to_string(e.role)}};
        if (e.is_lr) {
            row["is_lr"] = true;
        }
        j["entries"].push_back(row);
    }
    j["rgb_entries"] = nlohmann::json::array();
    for (const auto& e : m.rgb_entries) {
        j["rgb_entries"].push_back({{"id", e.id}, {"path", e.path.string()}});
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("cannot write manifest " + path.string());
    }
}

// ---------------------------------------------------------------------------

std::vector<PatchPair> extract_patches(const Tensor3<float>& hr, int tau, int patch_hr,
                                       const std::string& source_id) {
    if (tau < 1 || patch_hr < 1 || patch_hr % tau != 0) {
        throw ValidationError("patch size " + std::to_string(patch_hr) + " is not divisible by tau " +
                              std::to_string(tau));
    }
    std::vector<PatchPair> out;
    const int tiles_r = hr.rows() / patch_hr;
    const int tiles_c = hr.cols() / patch_hr;
    out.reserve(static_cast<std::size_t>(tiles_r) * tiles_c);
    for (int tr = 0; tr < tiles_r; ++tr) {
        for (int tc = 0; tc < tiles_c; ++tc) {
            PatchPair p;
            p.row = tr * patch_hr;
            p.col = tc * patch_hr;
            p.hr = hr.crop(p.row, p.col, patch_hr, patch_hr);
            p.lr = degrade(p.hr, tau);
            p.source_id = source_id;
            out.push_back(std::move(p));
        }
    }
    return out;
}

Tensor3<float> crop_to_multiple(const Tensor3<float>& image, int tau) {
    const int rows = image.rows() / tau * tau;
    const int cols = image.cols() / tau * tau;
    if (rows == image.rows() && cols == image.cols()) {
        return image;
    }
    return image.crop(0, 0, rows, cols);
}

namespace {

struct Wave {
    double fx;
    double fy;
    double phase;
    double amplitude;
    double spectral_freq;
    double spectral_phase;
};

Tensor3<float> smooth_field(int bands, int edge, Rng& rng) {
    constexpr int kWaves = 6;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<Wave> waves(kWaves);
    for (auto& w : waves) {
        // spatial frequency in cycles per pixel, kept below the x4 LR Nyquist limit
        const double f = 0.01 + 0.09 * uniform01(rng);
        const double theta = two_pi * uniform01(rng);
        w.fx = f * std::cos(theta);
        w.fy = f * std::sin(theta);
        w.phase = two_pi * uniform01(rng);
        w.amplitude = 0.3 + 0.7 * uniform01(rng);
        w.spectral_freq = 0.3 + 0.9 * uniform01(rng);
        w.spectral_phase = two_pi * uniform01(rng);
    }
    const double base_tilt = uniform01(rng) - 0.5;
    const double span = bands > 1 ? static_cast<double>(bands - 1) : 1.0;

    Tensor3<double> raw(bands, edge, edge);
    std::vector<double> spatial(static_cast<std::size_t>(edge) * edge);
    for (const auto& w : waves) {
        for (int r = 0; r < edge; ++r) {
            for (int c = 0; c < edge; ++c) {
                spatial[static_cast<std::size_t>(r) * edge + c] =
                    std::sin(two_pi * (w.fx * c + w.fy * r) + w.phase);
            }
        }
        for (int b = 0; b < bands; ++b) {
            const double t = b / span;
            const double gain = w.amplitude * (0.6 + 0.4 * std::cos(two_pi * w.spectral_freq * t + w.spectral_phase));
            auto plane = raw.channel(b);
            for (std::size_t i = 0; i < plane.size(); ++i) {
                plane[i] += gain * spatial[i];
            }
        }
    }
    for (int b = 0; b < bands; ++b) {
        const double offset = base_tilt * (b / span);
        for (auto& v : raw.channel(b)) {
            v += offset;
        }
    }
    const auto [lo, hi] = std::minmax_element(raw.values().begin(), raw.values().end());
    const double min_v = *lo;
    const double range = std::max(*hi - *lo, 1e-12);
    Tensor3<float> out(bands, edge, edge);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.data()[i] = static_cast<float>(0.05 + 0.9 * (raw.data()[i] - min_v) / range);
    }
    return out;
}

}  // namespace

std::vector<HsiCube> synth_dataset(int n_images, int bands, int edge, std::uint64_t seed) {
    if (n_images < 0 || bands < 1 || edge < 1) {
        throw ValidationError("synth_dataset needs n_images >= 0, bands >= 1, edge >= 1");
    }
    std::vector<HsiCube> out;
    out.reserve(static_cast<std::size_t>(n_images));
    for (int n = 0; n < n_images; ++n) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(n));
        out.emplace_back(smooth_field(bands, edge, rng));
    }
    return out;
}

std::vector<RgbImage> synth_rgb_dataset(int n_images, int edge, std::uint64_t seed) {
    if (n_images < 0 || edge < 1) {
        throw ValidationError("synth_rgb_dataset needs n_images >= 0, edge >= 1");
    }
    std::vector<RgbImage> out;
    out.reserve(static_cast<std::size_t>(n_images));
    for (int n = 0; n < n_images; ++n) {
        Rng rng = make_stream(seed ^ 0x5247424ull, static_cast<std::uint64_t>(n));
        out.emplace_back(smooth_field(RgbImage::kBands, edge, rng));
    }
    return out;
}

}  // namespace hsisr
