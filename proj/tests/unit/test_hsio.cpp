#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "hsisr/hsio.hpp"
#include "support.hpp"

using namespace hsisr;
using test_support::random_tensor;
using test_support::temp_dir;

namespace {

double keys(double x) {
    x = std::abs(x);
    if (x <= 1) return 1.5 * x * x * x - 2.5 * x * x + 1;
    if (x < 2) return -0.5 * x * x * x + 2.5 * x * x - 4 * x + 2;
    return 0;
}

int mirror(int j, int n) {
    while (j < 0 || j >= n) {
        j = j < 0 ? -j - 1 : 2 * n - 1 - j;
    }
    return j;
}

// Direct kernel sum along one axis, stretching the kernel when shrinking.
std::vector<double> oracle_resize_1d(const std::vector<double>& in, int out_n) {
    const int n = static_cast<int>(in.size());
    const double scale = static_cast<double>(out_n) / n;
    const double stretch = scale < 1 ? scale : 1.0;
    std::vector<double> out(static_cast<std::size_t>(out_n));
    for (int i = 0; i < out_n; ++i) {
        const double x = (i + 0.5) / scale - 0.5;
        double acc = 0, wsum = 0;
        for (int j = -3 * n; j < 4 * n; ++j) {
            const double w = keys((x - j) * stretch);
            acc += w * in[static_cast<std::size_t>(mirror(j, n))];
            wsum += w;
        }
        out[static_cast<std::size_t>(i)] = acc / wsum;
    }
    return out;
}

Tensor3<float> oracle_resize(const Tensor3<float>& x, int rows, int cols) {
    Tensor3<double> tmp(x.channels(), rows, x.cols());
    for (int c = 0; c < x.channels(); ++c) {
        for (int col = 0; col < x.cols(); ++col) {
            std::vector<double> line(static_cast<std::size_t>(x.rows()));
            for (int r = 0; r < x.rows(); ++r) line[static_cast<std::size_t>(r)] = x(c, r, col);
            const auto res = oracle_resize_1d(line, rows);
            for (int r = 0; r < rows; ++r) tmp(c, r, col) = res[static_cast<std::size_t>(r)];
        }
    }
    Tensor3<float> out(x.channels(), rows, cols);
    for (int c = 0; c < x.channels(); ++c) {
        for (int r = 0; r < rows; ++r) {
            std::vector<double> line(static_cast<std::size_t>(x.cols()));
            for (int col = 0; col < x.cols(); ++col) line[static_cast<std::size_t>(col)] = tmp(c, r, col);
            const auto res = oracle_resize_1d(line, cols);
            for (int col = 0; col < cols; ++col) out(c, r, col) = static_cast<float>(res[static_cast<std::size_t>(col)]);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("raster round trip is bit-exact") {
    const auto dir = temp_dir("hsio_roundtrip");
    const auto cube = random_tensor(5, 8, 8, 11);
    save_cube(cube, dir / "a.hdr");
    const HsiCube back = load_cube(dir / "a.hdr");
    CHECK(static_cast<const Tensor3<float>&>(back) == cube);

    Tensor3<float> one(1, 1, 1, 0.5f);
    save_cube(one, dir / "one");
    CHECK(load_cube(dir / "one.hdr")(0, 0, 0) == 0.5f);
}

TEST_CASE("raster file sizes") {
    const auto dir = temp_dir("hsio_size");
    save_cube(Tensor3<float>(31, 64, 64, 0.25f), dir / "big.hdr");
    CHECK(std::filesystem::file_size(dir / "big.hdr") == 80);
    CHECK(std::filesystem::file_size(dir / "big.raw") == 31u * 64 * 64 * 4);
}

TEST_CASE("payload shorter than the header declares") {
    const auto dir = temp_dir("hsio_short");
    save_cube(Tensor3<float>(30, 4, 4, 0.1f), dir / "c.hdr");
    RasterHeader h{31, 4, 4, 1.0};
    std::ofstream(dir / "c.hdr", std::ios::binary) << format_header(h);
    try {
        load_cube(dir / "c.hdr");
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("payload size mismatch") != std::string::npos);
    }
}

TEST_CASE("data_max normalization") {
    const auto dir = temp_dir("hsio_norm");
    save_cube(Tensor3<float>(2, 3, 3, 4095.0f), dir / "d.hdr");
    RasterHeader h{2, 3, 3, 4095.0};
    std::ofstream(dir / "d.hdr", std::ios::binary) << format_header(h);
    const HsiCube cube = load_cube(dir / "d.hdr");
    for (float v : cube.values()) {
        CHECK(v == 1.0f);
    }
}

TEST_CASE("malformed headers and bad paths") {
    const auto dir = temp_dir("hsio_bad");
    std::ofstream(dir / "e.hdr") << "ENVI\nbands 3\n";
    std::ofstream(dir / "e.raw") << "";
    CHECK_THROWS_AS(load_cube(dir / "e.hdr"), IoError);
    CHECK_THROWS_AS(load_cube(dir / "missing.hdr"), IoError);
    CHECK_THROWS_AS(save_cube(Tensor3<float>(1, 1, 1), "/proc/hsisr_forbidden/x.hdr"), IoError);
}

TEST_CASE("non-finite payload is rejected") {
    const auto dir = temp_dir("hsio_nan");
    Tensor3<float> cube(1, 2, 2, 0.5f);
    cube(0, 1, 1) = std::nanf("");
    save_cube(cube, dir / "n.hdr");
    CHECK_THROWS_AS(load_cube(dir / "n.hdr"), IoError);
}

TEST_CASE("header format parses back") {
    const RasterHeader h{31, 512, 480, 65535.0};
    const std::string text = format_header(h);
    CHECK(text.size() == 80);
    const RasterHeader back = parse_header(text);
    CHECK(back.bands == 31);
    CHECK(back.lines == 512);
    CHECK(back.samples == 480);
    CHECK(back.data_max == 65535.0);
}

TEST_CASE("PNG round trip quantizes to 8 bits") {
    const auto dir = temp_dir("hsio_png");
    const auto rgb = random_tensor(3, 5, 7, 3);
    save_png_rgb(rgb, dir / "x.png");
    const RgbImage back = load_rgb(dir / "x.png");
    REQUIRE(back.same_shape(rgb));
    CHECK(test_support::max_abs_diff(back, rgb) <= 0.5 / 255.0 + 1e-6);
}

TEST_CASE("bicubic of a constant band stays constant") {
    Tensor3<float> x(2, 7, 5, 0.3f);
    for (auto [r, c] : {std::pair{14, 10}, std::pair{3, 2}, std::pair{7, 5}, std::pair{1, 1}}) {
        const auto y = bicubic_resize(x, r, c);
        for (float v : y.values()) {
            CHECK(v == doctest::Approx(0.3).epsilon(1e-6));
        }
    }
}

TEST_CASE("bicubic to the same size is the identity") {
    const auto x = random_tensor(3, 9, 6, 5);
    CHECK(test_support::max_abs_diff(bicubic_resize(x, 9, 6), x) <= 1e-6);
}

TEST_CASE("bicubic upscale of a ramp matches a direct kernel sum") {
    Tensor3<float> ramp(1, 1, 4, std::vector<float>{0, 1, 2, 3});
    const auto up = bicubic_resize(ramp, 1, 8);
    const auto expected = oracle_resize_1d({0, 1, 2, 3}, 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(up(0, 0, i) == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-6));
    }
}

TEST_CASE("bicubic matches the oracle on random images, both directions") {
    const auto x = random_tensor(2, 12, 16, 9);
    for (auto [r, c] : {std::pair{24, 32}, std::pair{3, 4}, std::pair{6, 8}, std::pair{48, 64}, std::pair{5, 7}}) {
        CHECK(test_support::max_abs_diff(bicubic_resize(x, r, c), oracle_resize(x, r, c)) <= 1e-6);
    }
}

TEST_CASE("bicubic commutes with band permutation") {
    const auto x = random_tensor(4, 8, 8, 17);
    Tensor3<float> p(4, 8, 8);
    const int perm[4] = {2, 0, 3, 1};
    for (int b = 0; b < 4; ++b) {
        std::copy(x.channel(perm[b]).begin(), x.channel(perm[b]).end(), p.channel(b).begin());
    }
    const auto yx = bicubic_resize(x, 16, 16);
    const auto yp = bicubic_resize(p, 16, 16);
    for (int b = 0; b < 4; ++b) {
        CHECK(std::equal(yp.channel(b).begin(), yp.channel(b).end(), yx.channel(perm[b]).begin()));
    }
}

TEST_CASE("degrade shapes and errors") {
    const auto hr = random_tensor(31, 64, 64, 2);
    const auto lr = degrade(hr, 4);
    CHECK(lr.channels() == 31);
    CHECK(lr.rows() == 16);
    CHECK(lr.cols() == 16);
    CHECK_THROWS_AS(degrade(random_tensor(1, 10, 12, 1), 4), ShapeError);
    const auto flat = degrade(Tensor3<float>(2, 16, 16, 0.7f), 4);
    for (float v : flat.values()) {
        CHECK(v == doctest::Approx(0.7).epsilon(1e-6));
    }
}

TEST_CASE("degrade-upsample loses less on smooth content") {
    const int n = 64;
    Tensor3<float> smooth(1, n, n), sharp(1, n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            smooth(0, r, c) = static_cast<float>(0.5 + 0.3 * std::sin(2 * M_PI * (r + c) / 64.0));
            sharp(0, r, c) = static_cast<float>(0.5 + 0.3 * std::sin(2 * M_PI * (r + c) / 5.0));
        }
    }
    auto error = [](const Tensor3<float>& x) {
        const auto back = oracle_resize(oracle_resize(x, 16, 16), 64, 64);
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(x.data()[i] - back.data()[i], 2);
        return std::sqrt(s / x.size());
    };
    CHECK(error(smooth) < error(sharp));
}

TEST_CASE("extract_patches tiling counts") {
    CHECK(extract_patches(Tensor3<float>(2, 512, 512), 4, 64).size() == 64);
    const auto one = extract_patches(Tensor3<float>(2, 64, 64), 4, 64);
    REQUIRE(one.size() == 1);
    CHECK(one[0].row == 0);
    CHECK(one[0].col == 0);
    CHECK(extract_patches(Tensor3<float>(2, 100, 100), 4, 64).size() == 1);
    CHECK(extract_patches(Tensor3<float>(2, 30, 30), 4, 64).empty());
    CHECK_THROWS_AS(extract_patches(Tensor3<float>(2, 64, 64), 3, 64), ValidationError);
}

TEST_CASE("extract_patches tiles reassemble the cropped image") {
    const auto hr = random_tensor(3, 70, 90, 4);
    const auto pairs = extract_patches(hr, 4, 32, "img");
    REQUIRE(pairs.size() == 2 * 2);
    Tensor3<float> rebuilt(3, 64, 64);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        CHECK(p.source_id == "img");
        CHECK(p.row == static_cast<int>(i / 2) * 32);
        CHECK(p.col == static_cast<int>(i % 2) * 32);
        CHECK(p.lr.rows() * 4 == p.hr.rows());
        CHECK(p.lr == degrade(p.hr, 4));
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 32; ++r)
                for (int k = 0; k < 32; ++k) rebuilt(c, p.row + r, p.col + k) = p.hr(c, r, k);
    }
    CHECK(rebuilt == hr.crop(0, 0, 64, 64));
}

TEST_CASE("synthetic data is deterministic, smooth and in range") {
    const auto a = synth_dataset(3, 31, 32, 42);
    const auto b = synth_dataset(3, 31, 32, 42);
    REQUIRE(a.size() == 3);
    double max_step = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(static_cast<const Tensor3<float>&>(a[i]) == b[i]);
        for (float v : a[i].values()) {
            CHECK(v >= 0.05f - 1e-6f);
            CHECK(v <= 0.95f + 1e-6f);
        }
        for (int r = 0; r < 32; ++r)
            for (int c = 0; c < 32; ++c)
                for (int k = 0; k + 1 < 31; ++k)
                    max_step = std::max(max_step, static_cast<double>(std::abs(a[i](k + 1, r, c) - a[i](k, r, c))));
    }
    CHECK(max_step < 0.2);
    CHECK(synth_dataset(0, 31, 32, 1).empty());
    CHECK_FALSE(static_cast<const Tensor3<float>&>(synth_dataset(1, 31, 32, 43)[0]) == a[0]);
}

TEST_CASE("manifest round trip and validation") {
    const auto dir = temp_dir("hsio_manifest");
    save_cube(Tensor3<float>(2, 4, 4, 0.5f), dir / "a.hdr");
    save_cube(Tensor3<float>(2, 4, 4, 0.5f), dir / "b.hdr");
    DatasetManifest m;
    m.root = ".";
    m.entries.push_back({"a", "a.hdr", Role::labeled_train, false});
    m.entries.push_back({"b", "b.hdr", Role::test, false});
    save_manifest(m, dir / "manifest.json");
    const DatasetManifest back = load_manifest(dir / "manifest.json");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.with_role(Role::test).size() == 1);
    CHECK(std::filesystem::equivalent(back.entries[0].path, dir / "a.hdr"));

    std::ofstream(dir / "dup.json") << R"({"entries":[{"id":"a","path":"a.hdr","role":"test"},
                                          {"id":"a","path":"b.hdr","role":"test"}]})";
    CHECK_THROWS_AS(load_manifest(dir / "dup.json"), ValidationError);
    std::ofstream(dir / "missing.json") << R"({"entries":[{"id":"x","path":"nope.hdr","role":"test"}]})";
    CHECK_THROWS_AS(load_manifest(dir / "missing.json"), ValidationError);
    std::ofstream(dir / "unknown.json") << R"({"entries":[], "extra": 1})";
    CHECK_THROWS_AS(load_manifest(dir / "unknown.json"), ValidationError);
    std::ofstream(dir / "role.json") << R"({"entries":[{"id":"a","path":"a.hdr","role":"validation"}]})";
    CHECK_THROWS_AS(load_manifest(dir / "role.json"), ValidationError);
}
