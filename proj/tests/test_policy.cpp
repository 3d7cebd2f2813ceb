#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "anomid/error.hpp"
#include "anomid/policy.hpp"

using namespace anomid;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("LLR update adds only sampled sources and refreshes the estimate") {
    const auto models = gaussian_sources(std::vector<double>{1.0, 1.0, 0.5});
    auto st = RunState::initial(3);
    CHECK(st.estimate.is_full());
    const std::vector<double> obs = {1.0, -2.0};
    update_llrs(st, models, Hypothesis::of(3, {0, 2}), obs);
    CHECK(st.n == 1);
    CHECK(st.llr[0] == doctest::Approx(0.5));
    CHECK(st.llr[1] == 0.0);
    CHECK(st.llr[2] == doctest::Approx(0.5 * -2.0 - 0.125));
    CHECK(st.count == std::vector<std::int64_t>{1, 0, 1});
    CHECK(st.samples_taken() == 2);
    CHECK(st.estimate == Hypothesis::of(3, {0, 1}));
    // An observation at mu/2 leaves the LLR, and membership, unchanged.
    update_llrs(st, models, Hypothesis::of(3, {1}), std::vector<double>{0.5});
    CHECK(st.llr[1] == 0.0);
    CHECK(st.estimate.contains(1));
    CHECK_THROWS_AS(update_llrs(st, models, Hypothesis::of(3, {1}), std::vector<double>{}), InvalidArgument);
}

TEST_CASE("misclassification threshold") {
    CHECK(threshold_misclass(1e-3, 10, 1) == doctest::Approx(std::log(1000.0) + std::log(10.0)));
    CHECK(threshold_misclass(1e-3, 10, 1) == doctest::Approx(9.2103).epsilon(1e-4));
    CHECK(threshold_misclass(0.5, 10, 10) == doctest::Approx(std::log(2.0)));
    CHECK(threshold_misclass(1e-1, 10, 5) == doctest::Approx(std::log(10.0) + std::log(252.0)));
    CHECK_THROWS_AS(threshold_misclass(0.0, 10, 1), InvalidArgument);
}

TEST_CASE("familywise thresholds") {
    const auto t = thresholds_familywise(1e-3, 1e-3, 10, 1, 1);
    CHECK(t.a == doctest::Approx(std::log(1000.0) + std::log(20.0)));
    CHECK(t.b == doctest::Approx(std::log(1000.0) + std::log(20.0)));
    const auto u = thresholds_familywise(1e-10, 1e-2, 10, 3, 3);
    CHECK(u.b - u.a == doctest::Approx(std::log(1e8)));
    const auto v = thresholds_familywise(1e-2, 1e-3, 10, 2, 4);
    CHECK(v.a == doctest::Approx(std::log(1000.0) + 4 * std::log(2.0) + std::log(210.0)));
    CHECK(v.b == doctest::Approx(std::log(100.0) + 2 * std::log(2.0) + std::log(45.0)));
}

TEST_CASE("sum-intersection rule") {
    const std::vector<double> llr = {3.0, -2.0};
    CHECK_FALSE(check_sum_intersection(llr, 1, 2.5).stopped);
    const auto d = check_sum_intersection(llr, 1, 1.9);
    CHECK(d.stopped);
    CHECK(d.decided == Hypothesis::of(2, {0}));
    CHECK(d.kind == StopKind::SumIntersection);

    const auto e = check_sum_intersection(std::vector<double>{5.0, -4.0, 0.1}, 2, 4.0);
    CHECK(e.stopped);
    CHECK(e.decided == Hypothesis::of(3, {0, 2}));

    CHECK_FALSE(check_sum_intersection(std::vector<double>{0.0, 0.0}, 1, 1e-9).stopped);
}

TEST_CASE("stopping is monotone in the threshold") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> llr(6);
        for (auto& v : llr) v = g(rng);
        const double stat = sum_intersection_statistic(llr, 2);
        CHECK(check_sum_intersection(llr, 2, stat).stopped);
        CHECK(check_sum_intersection(llr, 2, 0.5 * stat).stopped);
        CHECK_FALSE(check_sum_intersection(llr, 2, std::nextafter(stat, kInf) * 1.0000001).stopped);
    }
}

TEST_CASE("leap rule with unit tolerances needs both sides") {
    const std::vector<double> llr = {4.0, -3.0, 6.0};
    CHECK_FALSE(check_leap(llr, 1, 1, 3.5, 3.5).stopped);
    const auto d = check_leap(llr, 1, 1, 3.0, 4.0);
    CHECK(d.stopped);
    CHECK(d.kind == StopKind::LeapHat);
    CHECK(d.l == 0);
    CHECK(d.decided == Hypothesis::of(3, {0, 2}));
}

TEST_CASE("leap rule agrees with the sum-intersection rule at unit tolerance") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> llr(5);
        for (auto& v : llr) v = g(rng);
        const double d = std::abs(g(rng));
        CHECK(check_leap(llr, 1, 1, d, d).stopped == check_sum_intersection(llr, 1, d).stopped);
    }
}

TEST_CASE("leap rule hand-evaluated example") {
    const std::vector<double> llr = {6.0, 5.0, -0.2};
    const auto conds = leap_conditions(llr, 2, 1);
    REQUIRE(conds.size() == 2);
    CHECK(conds[0].b_sum == doctest::Approx(11.0));
    CHECK(conds[0].a_sum == doctest::Approx(0.2));
    CHECK(conds[1].b_sum == doctest::Approx(5.0));
    CHECK(std::isinf(conds[1].a_sum));
    CHECK_FALSE(check_leap(llr, 2, 1, 4.0, 8.0).stopped);
    const auto d = check_leap(llr, 2, 1, 4.0, 5.0);
    CHECK(d.stopped);
    CHECK(d.l == 1);
    CHECK(d.decided == Hypothesis::full(3));
}

TEST_CASE("leap rule pads missing negatives with infinity") {
    const std::vector<double> llr = {2.0, 3.0, 7.0};
    const auto d = check_leap(llr, 1, 1, 100.0, 2.0);
    CHECK(d.stopped);
    CHECK(d.decided == Hypothesis::full(3));
    CHECK_FALSE(check_leap(llr, 1, 1, 100.0, 2.5).stopped);
}

TEST_CASE("leap rule drop condition removes the weakest positives") {
    const std::vector<double> llr = {0.1, 9.0, -5.0, -6.0};
    const auto d = check_leap(llr, 1, 2, 5.0, 8.0);
    CHECK(d.stopped);
    CHECK(d.kind == StopKind::LeapCheck);
    CHECK(d.l == 1);
    CHECK(d.decided == Hypothesis::of(4, {1}));
}

TEST_CASE("leap decisions add at most l negatives") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 4.0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> llr(7);
        for (auto& v : llr) v = g(rng);
        for (const auto& c : leap_conditions(llr, 3, 2)) {
            int negatives_in = 0;
            for (int i = 0; i < 7; ++i) negatives_in += (llr[i] < 0.0 && c.decided.contains(i));
            if (c.kind == StopKind::LeapHat) CHECK(negatives_in <= c.l);
            else CHECK(negatives_in == 0);
        }
    }
}
