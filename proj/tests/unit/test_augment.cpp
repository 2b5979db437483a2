#include <cmath>

#include "doctest.h"
#include "hsisr/augment.hpp"
#include "hsisr/hsio.hpp"
#include "support.hpp"

using namespace hsisr;
using test_support::random_tensor;

TEST_CASE("mixing matrix rows are convex weights") {
    Rng rng(1);
    for (int c : {1, 2, 8, 31}) {
        const auto b = make_mixing_matrix(c, rng);
        REQUIRE(b.size == c);
        for (int i = 0; i < c; ++i) {
            double sum = 0;
            for (int j = 0; j < c; ++j) {
                CHECK(b(i, j) >= 0.0);
                CHECK(b(i, j) < 1.0 + 1e-12);
                sum += b(i, j);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    Rng one(5);
    CHECK(make_mixing_matrix(1, one)(0, 0) == 1.0);
}

TEST_CASE("mixing matrix is deterministic for a seed") {
    Rng a(77), b(77);
    CHECK(make_mixing_matrix(6, a).b == make_mixing_matrix(6, b).b);
}

TEST_CASE("mixup with alpha 1 is the identity") {
    Rng rng(3);
    const auto b = make_mixing_matrix(5, rng);
    const auto lr = random_tensor(5, 4, 4, 1);
    const auto hr = random_tensor(5, 16, 16, 2);
    const auto [lr2, hr2] = spectral_mixup(lr, hr, 1.0, b);
    CHECK(lr2 == lr);
    CHECK(hr2 == hr);
}

TEST_CASE("mixup hand example") {
    MixingMatrix b{2, {0.25, 0.75, 0.5, 0.5}, 0};
    Tensor3<float> x(2, 1, 1, std::vector<float>{0.2f, 0.8f});
    const auto y = mix_bands(x, 0.5, b);
    CHECK(y(0, 0, 0) == doctest::Approx(0.425).epsilon(1e-6));
    CHECK(y(1, 0, 0) == doctest::Approx(0.65).epsilon(1e-6));
}

TEST_CASE("mixup keeps flat spectra flat") {
    Rng rng(4);
    const auto b = make_mixing_matrix(7, rng);
    Tensor3<float> x(7, 3, 3, 0.37f);
    for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
        const auto mixed = mix_bands(x, alpha, b);
        for (float v : mixed.values()) {
            CHECK(v == doctest::Approx(0.37).epsilon(1e-6));
        }
    }
}

TEST_CASE("mixup output stays inside each pixel's band range") {
    Rng rng(9);
    const auto b = make_mixing_matrix(31, rng);
    const auto x = random_tensor(31, 8, 8, 12);
    const auto y = mix_bands(x, 0.5, b);
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            float lo = 1, hi = 0;
            for (int k = 0; k < 31; ++k) {
                lo = std::min(lo, x(k, r, c));
                hi = std::max(hi, x(k, r, c));
            }
            for (int k = 0; k < 31; ++k) {
                CHECK(y(k, r, c) >= lo - 1e-6f);
                CHECK(y(k, r, c) <= hi + 1e-6f);
            }
        }
    }
}

TEST_CASE("mixup commutes with degradation") {
    Rng rng(21);
    const auto b = make_mixing_matrix(6, rng);
    const auto hr = random_tensor(6, 32, 32, 5);
    const auto lr = degrade(hr, 4);
    const auto [lr2, hr2] = spectral_mixup(lr, hr, 0.5, b);
    CHECK(test_support::max_abs_diff(degrade(hr2, 4), lr2) <= 1e-6);
}

TEST_CASE("mixup rejects mismatched bands") {
    Rng rng(2);
    const auto b = make_mixing_matrix(4, rng);
    CHECK_THROWS_AS(mix_bands(Tensor3<float>(5, 2, 2), 0.5, b), ShapeError);
    CHECK_THROWS_AS(spectral_mixup(Tensor3<float>(4, 2, 2), Tensor3<float>(5, 8, 8), 0.5, b), ShapeError);
    CHECK_THROWS_AS(mix_bands(Tensor3<float>(4, 2, 2), 1.5, b), ValidationError);
}

TEST_CASE("interpolation to three bands is the identity") {
    const auto rgb = random_tensor(3, 4, 5, 8);
    CHECK(spectral_interpolate(rgb, 3) == rgb);
}

TEST_CASE("interpolation to eight bands puts three bands in the first interval") {
    CHECK(interior_band_counts(8) == std::pair{3, 2});
    Tensor3<double> rgb(3, 1, 1, std::vector<double>{1.0, 0.0, 0.0});
    const auto out = spectral_interpolate(rgb, 8);
    // R multipliers in the first interval, then nothing of R after G
    const double expected[8] = {1.0, 0.75, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0};
    for (int k = 0; k < 8; ++k) {
        CHECK(out(k, 0, 0) == doctest::Approx(expected[k]).epsilon(1e-12));
    }
    Tensor3<double> blue(3, 1, 1, std::vector<double>{0.0, 0.0, 1.0});
    const auto ob = spectral_interpolate(blue, 8);
    const double expected_b[8] = {0, 0, 0, 0, 0, 1.0 / 3, 2.0 / 3, 1.0};
    for (int k = 0; k < 8; ++k) {
        CHECK(ob(k, 0, 0) == doctest::Approx(expected_b[k]).epsilon(1e-12));
    }
}

TEST_CASE("interpolation of flat and collinear pixels") {
    for (int m : {3, 4, 7, 8, 9, 16}) {
        Tensor3<float> flat(3, 2, 2, 0.6f);
        const auto out = spectral_interpolate(flat, m);
        for (float v : out.values()) {
            CHECK(v == doctest::Approx(0.6).epsilon(1e-6));
        }
    }
    // Collinear in band index for an even split: a ramp over 9 bands.
    Tensor3<double> rgb(3, 1, 1, std::vector<double>{0.1, 0.5, 0.9});
    const auto out = spectral_interpolate(rgb, 9);
    for (int k = 0; k < 9; ++k) {
        CHECK(std::abs(out(k, 0, 0) - (0.1 + 0.1 * k)) <= 1e-6);
    }
}

TEST_CASE("interpolation errors") {
    CHECK_THROWS_AS(spectral_interpolate(Tensor3<float>(3, 1, 1), 2), ValidationError);
    CHECK_THROWS_AS(spectral_interpolate(Tensor3<float>(4, 1, 1), 8), ShapeError);
}

TEST_CASE("neighbouring interpolated bands correlate more than the end bands") {
    const auto rgb = synth_rgb_dataset(3, 32, 6);
    for (const auto& image : rgb) {
        const auto out = spectral_interpolate(static_cast<const Tensor3<float>&>(image), 8);
        auto corr = [&](int a, int b) {
            const auto x = out.channel(a);
            const auto y = out.channel(b);
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                mx += x[i];
                my += y[i];
            }
            mx /= x.size();
            my /= y.size();
            double sxy = 0, sxx = 0, syy = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                sxy += (x[i] - mx) * (y[i] - my);
                sxx += (x[i] - mx) * (x[i] - mx);
                syy += (y[i] - my) * (y[i] - my);
            }
            return sxy / std::sqrt(sxx * syy);
        };
        const double ends = corr(0, 7);
        for (int k = 0; k + 1 < 8; ++k) {
            CHECK(corr(k, k + 1) >= ends - 1e-9);
        }
    }
}
