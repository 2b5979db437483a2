#include <cmath>
#include <limits>

#include "doctest.h"
#include "hsisr/core_types.hpp"

using namespace hsisr;

TEST_CASE("validate_cube accepts an all-zero cube") {
    HsiCube cube(3, 4, 4, 0.0f);
    CHECK(validate_cube(cube).ok());
}

TEST_CASE("validate_cube reports NaN with its position") {
    HsiCube cube(3, 4, 4, 0.5f);
    cube(1, 2, 3) = std::numeric_limits<float>::quiet_NaN();
    const auto result = validate_cube(cube);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].kind == ViolationKind::non_finite);
    CHECK(result.violations[0].message == "non-finite value at (1,2,3)");
}

TEST_CASE("validate_cube reports out-of-range values") {
    HsiCube cube(2, 2, 2, 0.5f);
    cube(0, 1, 0) = 1.5f;
    const auto result = validate_cube(cube);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].kind == ViolationKind::out_of_range);
    CHECK(result.violations[0].message.find("value out of [0,1]") == 0);
}

TEST_CASE("validate_cube is ok exactly on finite values in range") {
    HsiCube cube(2, 3, 3, 1.0f);
    CHECK(validate_cube(cube).ok());
    cube(0, 0, 0) = -1e-7f;
    CHECK_FALSE(validate_cube(cube).ok());
    cube(0, 0, 0) = 0.0f;
    cube(1, 2, 2) = std::numeric_limits<float>::infinity();
    CHECK_FALSE(validate_cube(cube).ok());
}

TEST_CASE("RgbImage rejects band counts other than three") {
    CHECK_THROWS_AS(RgbImage(Tensor3<float>(4, 2, 2)), ShapeError);
    CHECK_NOTHROW(RgbImage(Tensor3<float>(3, 2, 2)));
}

TEST_CASE("group plans") {
    CHECK(make_group_plan(31, 8, 2).starts == std::vector<int>{0, 6, 12, 18, 23});
    CHECK(make_group_plan(8, 8, 2).starts == std::vector<int>{0});
    CHECK(make_group_plan(10, 4, 0).starts == std::vector<int>{0, 4, 6});
    CHECK_THROWS_AS(make_group_plan(6, 8, 2), ValidationError);
    CHECK_THROWS_AS(make_group_plan(31, 8, 8), ValidationError);
}

TEST_CASE("group plans cover every band and end on the last one") {
    for (int c = 1; c <= 40; ++c) {
        for (int m = 1; m <= c; ++m) {
            for (int overlap = 0; overlap < m; ++overlap) {
                const GroupPlan plan = make_group_plan(c, m, overlap);
                CHECK_NOTHROW(plan.validate());
                CHECK(plan.starts.back() + m == c);
                for (int count : plan.coverage()) {
                    CHECK(count >= 1);
                }
                CHECK(make_group_plan(c, m, overlap).starts == plan.starts);
            }
        }
    }
}

TEST_CASE("coverage for the default plan") {
    const auto cov = make_group_plan(31, 8, 2).coverage();
    for (int b = 0; b < 31; ++b) {
        const bool doubled = b == 6 || b == 7 || b == 12 || b == 13 || b == 18 || b == 19 || b == 23 || b == 24 || b == 25;
        CHECK(cov[static_cast<std::size_t>(b)] == (doubled ? 2 : 1));
    }
}

TEST_CASE("scale config invariants") {
    CHECK_NOTHROW((ScaleConfig{4, 64}).validate());
    CHECK_NOTHROW((ScaleConfig{8, 64}).validate());
    CHECK_THROWS_AS((ScaleConfig{3, 63}).validate(), ValidationError);
    CHECK_THROWS_AS((ScaleConfig{4, 62}).validate(), ValidationError);
}

TEST_CASE("train config defaults and invariants") {
    TrainConfig c;
    CHECK(c.lr_initial == doctest::Approx(1e-4));
    CHECK(c.batches_per_iter.total() == 9);
    CHECK(c.effective_batch_size() == 8);
    c.batches_per_iter.ssl = 0;
    CHECK(c.effective_batch_size() == 16);
    c.batch_size = 3;
    CHECK(c.effective_batch_size() == 3);

    TrainConfig bad;
    bad.batches_per_iter.hsi = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = TrainConfig{};
    bad.alpha_mixup = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = TrainConfig{};
    bad.batches_per_iter.rgb = -1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("term names round-trip") {
    for (Term t : {Term::hsi, Term::rgb, Term::mixup, Term::ssl}) {
        CHECK(parse_term(to_string(t)) == t);
    }
    CHECK(parse_term("smixup") == Term::mixup);
    CHECK_THROWS_AS(parse_term("gan"), ValidationError);
}
