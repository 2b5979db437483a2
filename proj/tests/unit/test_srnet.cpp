#include <cmath>
#include <set>

#include "doctest.h"
#include "hsisr/augment.hpp"
#include "hsisr/resample.hpp"
#include "hsisr/srnet.hpp"
#include "support.hpp"

using namespace hsisr;
using test_support::max_abs_diff;
using test_support::random_tensor;

namespace {

NetworkConfig tiny(int tau = 4, int bands = 31) {
    NetworkConfig c;
    c.feature_width = 8;
    c.ssb_per_stage = 1;
    c.tau = tau;
    c.hsi_bands = bands;
    c.attention_reduction = 4;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    NetworkConfig c = tiny();
    CHECK_NOTHROW(c.validate());
    c.feature_width = 10;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = tiny();
    c.tau = 3;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = tiny();
    c.group_size = 40;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_THROWS_AS(SrNet<float>(c, 0), ValidationError);
}

TEST_CASE("encoder output sizes per scale") {
    for (int tau : {2, 4, 8}) {
        SrNet<float> net(tiny(tau), 1);
        const auto y = net.encode_group(random_tensor(8, 16, 16, 2));
        CHECK(y.channels() == 8);
        CHECK(y.rows() == 16 * tau);
        CHECK(y.cols() == 16 * tau);
    }
    SrNet<float> net(tiny(), 1);
    CHECK_THROWS_AS(net.encode_group(random_tensor(7, 16, 16, 2)), ShapeError);
}

TEST_CASE("zero tails reduce both paths to bicubic") {
    SrNet<float> net(tiny(), 3);
    const auto lr = random_tensor(31, 16, 16, 4);
    const auto y = net.forward_hsi(lr);
    CHECK(y.channels() == 31);
    CHECK(y.rows() == 64);
    CHECK(max_abs_diff(y, bicubic_resize(lr, 64, 64)) <= 1e-6);

    const auto rgb = random_tensor(3, 16, 16, 5);
    const auto z = net.forward_rgb(rgb);
    CHECK(z.channels() == 3);
    CHECK(max_abs_diff(z, bicubic_resize(rgb, 64, 64)) <= 1e-6);
}

TEST_CASE("non-degenerate forward is finite and deterministic") {
    NetworkConfig c = tiny();
    c.zero_tail = false;
    SrNet<float> net(c, 6);
    const auto lr = random_tensor(31, 16, 16, 7);
    const auto a = net.forward_hsi(lr);
    const auto b = net.forward_hsi(lr);
    CHECK(a == b);
    for (float v : a.values()) {
        CHECK(std::isfinite(v));
    }
    CHECK(max_abs_diff(a, bicubic_resize(lr, 64, 64)) > 1e-4);
    CHECK_THROWS_AS(net.forward_hsi(random_tensor(30, 16, 16, 1)), ShapeError);
    CHECK_THROWS_AS(net.forward_rgb(random_tensor(4, 16, 16, 1)), ShapeError);
}

TEST_CASE("assemble_groups averages overlaps") {
    Tensor3<float> single = random_tensor(5, 2, 2, 1);
    CHECK(assemble_groups<float>({{0, single}}, 5) == single);

    Tensor3<float> a(2, 1, 1, std::vector<float>{0.1f, 0.2f});
    Tensor3<float> b(2, 1, 1, std::vector<float>{0.4f, 0.9f});
    const auto out = assemble_groups<float>({{0, a}, {1, b}}, 3);
    CHECK(out(0, 0, 0) == doctest::Approx(0.1));
    CHECK(out(1, 0, 0) == doctest::Approx(0.3));
    CHECK(out(2, 0, 0) == doctest::Approx(0.9));

    CHECK_THROWS_AS(assemble_groups<float>({{0, a}}, 3), ValidationError);
}

TEST_CASE("default plan assembly against hand counts") {
    const auto plan = make_group_plan(31, 8, 2);
    std::vector<std::pair<int, Tensor3<double>>> groups;
    for (std::size_t g = 0; g < plan.starts.size(); ++g) {
        // group g writes the value g + 1 in every band
        groups.emplace_back(plan.starts[g], Tensor3<double>(8, 1, 1, static_cast<double>(g + 1)));
    }
    const auto out = assemble_groups(groups, 31);
    for (int b = 0; b < 31; ++b) {
        double sum = 0;
        int count = 0;
        for (std::size_t g = 0; g < plan.starts.size(); ++g) {
            if (b >= plan.starts[g] && b < plan.starts[g] + 8) {
                sum += static_cast<double>(g + 1);
                ++count;
            }
        }
        CHECK(out(b, 0, 0) == doctest::Approx(sum / count));
    }
    CHECK(out(6, 0, 0) == doctest::Approx(1.5));
    CHECK(out(24, 0, 0) == doctest::Approx(4.5));
}

TEST_CASE("the encoder is shared by both paths") {
    NetworkConfig c = tiny();
    c.zero_tail = false;
    SrNet<float> net(c, 8);
    const auto lr = random_tensor(31, 8, 8, 9);
    const auto rgb = random_tensor(3, 8, 8, 10);
    const auto h0 = net.forward_hsi(lr);
    const auto r0 = net.forward_rgb(rgb);
    net.encoder().head().bias().value[0] += 0.5f;
    CHECK_FALSE(net.forward_hsi(lr) == h0);
    CHECK_FALSE(net.forward_rgb(rgb) == r0);
}

TEST_CASE("encoder size does not depend on the band count") {
    auto encoder_params = [](int bands) {
        SrNet<float> net(tiny(4, bands), 0);
        std::size_t n = 0;
        for (const auto* p : net.parameters()) {
            if (p->name.rfind("encoder.", 0) == 0) n += p->value.size();
        }
        return std::pair{n, net.parameter_count()};
    };
    const auto [e31, t31] = encoder_params(31);
    const auto [e16, t16] = encoder_params(16);
    CHECK(e31 == e16);
    CHECK(t31 > t16);
}

TEST_CASE("parameter names are unique") {
    SrNet<float> net(tiny(), 0);
    std::set<std::string> names;
    for (const auto* p : net.parameters()) {
        CHECK(names.insert(p->name).second);
    }
}

TEST_CASE("forward_hsi gradient against finite differences") {
    NetworkConfig c = tiny(4, 6);
    c.group_size = 3;
    c.overlap = 1;
    c.zero_tail = false;
    SrNet<double> net(c, 21);
    const auto lr = random_tensor<double>(6, 4, 4, 22);
    const auto w = random_tensor<double>(6, 16, 16, 23, -1, 1);
    auto loss = [&] {
        const auto y = net.forward_hsi(lr);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * w.data()[i];
        return s;
    };
    net.zero_grad();
    nn::HsiTape<double> tape;
    net.forward_hsi(lr, &tape);
    net.backward_hsi(tape, w);
    auto params = net.parameters();
    Rng rng(5);
    constexpr double h = 1e-6;
    for (int probe = 0; probe < 40; ++probe) {
        auto* p = params[static_cast<std::size_t>(rng() % params.size())];
        const std::size_t k = rng() % p->value.size();
        const double keep = p->value[k];
        p->value[k] = keep + h;
        const double up = loss();
        p->value[k] = keep - h;
        const double down = loss();
        p->value[k] = keep;
        const double numeric = (up - down) / (2 * h);
        INFO(p->name << "[" << k << "]");
        CHECK(std::abs(p->grad[k] - numeric) / std::max({std::abs(numeric), std::abs(p->grad[k]), 1e-6}) <= 1e-4);
    }
}

TEST_CASE("float to double cast keeps the outputs") {
    NetworkConfig c = tiny();
    c.zero_tail = false;
    SrNet<float> net(c, 30);
    const SrNet<double> wide = net.cast<double>();
    const auto lr = random_tensor(31, 8, 8, 31);
    const auto a = net.forward_hsi(lr);
    const auto b = wide.forward_hsi(lr.cast<double>());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-4);
    }
}
