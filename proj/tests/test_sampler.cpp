#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "anomid/allocation.hpp"
#include "anomid/error.hpp"
#include "anomid/sampler.hpp"
#include "anomid/stats.hpp"
#include "reference_setup.hpp"

using namespace anomid;

namespace {

SamplerConfig forced_config(double K, double cp) {
    SamplerConfig cfg;
    cfg.K = K;
    cfg.cp = cp;
    cfg.mode = SamplerMode::Forced;
    cfg.top_up = false;
    return cfg;
}

}  // namespace

TEST_CASE("plain mode returns the targets") {
    const std::vector<double> target = {0.3, 0.2, 0.5};
    CHECK(sampling_probs(4, target, forced_config(1.0, 0.01), SamplerMode::Plain) == target);
}

TEST_CASE("forced mode leaves strictly positive targets alone") {
    const std::vector<double> target = {0.3, 0.2, 0.5};
    CHECK(sampling_probs(1, target, forced_config(1.0, 0.01), SamplerMode::Forced) == target);
}

TEST_CASE("forced mode moves mass onto zero targets") {
    const std::vector<double> target = {0.5, 0.5, 0.0, 0.0};
    const auto p = sampling_probs(1, target, forced_config(1.0, 0.1), SamplerMode::Forced);
    CHECK(p[0] == doctest::Approx(0.4));
    CHECK(p[1] == doctest::Approx(0.4));
    CHECK(p[2] == doctest::Approx(0.1));
    CHECK(p[3] == doctest::Approx(0.1));
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
    // The floor decays as n^-delta.
    const auto q = sampling_probs(32, target, forced_config(1.0, 0.1), SamplerMode::Forced);
    CHECK(q[2] == doctest::Approx(0.1 * std::pow(32.0, -0.2)));
}

TEST_CASE("forced mode rejects a floor the targets cannot pay for") {
    const std::vector<double> target = {0.05, 0.0, 0.0};
    CHECK_THROWS_AS(sampling_probs(1, target, forced_config(1.0, 0.1), SamplerMode::Forced), ConfigError);
}

TEST_CASE("sampler config validation") {
    SamplerConfig cfg;
    cfg.K = 5.0;
    CHECK_NOTHROW(cfg.validate(10));
    cfg.delta = 0.5;
    CHECK_THROWS_AS(cfg.validate(10), ConfigError);
    cfg.delta = 0.2;
    cfg.K = 11.0;
    CHECK_THROWS_AS(cfg.validate(10), ConfigError);
    CHECK(parse_sampler_mode("forced") == SamplerMode::Forced);
    CHECK_THROWS_AS(parse_sampler_mode("greedy"), ConfigError);
}

TEST_CASE("top-up fills to floor(K)") {
    std::vector<double> p = {0.5, 0.25, 0.0, 0.25};
    top_up(p, 2);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(2.0));
    for (double v : p) CHECK(v <= 1.0);
    CHECK(p[0] > p[1]);
    std::vector<double> over = {0.9, 0.9, 0.9};
    CHECK_THROWS_AS(top_up(over, 2), ConstraintViolation);
}

TEST_CASE("degenerate marginals are drawn deterministically") {
    std::mt19937_64 rng(1);
    const std::vector<double> p = {1, 1, 1, 0, 0, 0};
    for (int i = 0; i < 100; ++i) CHECK(draw_subset(p, 3, rng) == Hypothesis::of(6, {0, 1, 2}));
}

TEST_CASE("draws hit their marginals and never exceed floor(K)") {
    std::mt19937_64 rng(2);
    const std::vector<double> p = {0.5, 0.5, 0.5, 0.5};
    const int draws = 100000;
    std::vector<int> hits(4, 0);
    for (int t = 0; t < draws; ++t) {
        const auto B = draw_subset(p, 2, rng);
        CHECK(B.size() == 2);
        for (int i : B.members()) ++hits[i];
    }
    const double se = std::sqrt(0.25 / draws);
    for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - 0.5) <= 3 * se);
    CHECK_THROWS_AS(draw_subset(std::vector<double>{0.9, 0.9, 0.9}, 2, rng), ConstraintViolation);
}

TEST_CASE("reference targets with top-up sample exactly five sources") {
    const auto models = testutil::reference_models();
    auto probs = c_star_misclass(models, testutil::reference_truth(), 1, 5.0).c;
    top_up(probs, 5);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20000; ++t) CHECK(draw_subset(probs, 5, rng).size() == 5);
}

TEST_CASE("target table caches per estimate") {
    int calls = 0;
    TargetTable big(14, [&](const Hypothesis& D) {
        ++calls;
        AllocationVector a;
        a.c.assign(14, D.is_empty() ? 0.0 : 0.5);
        return a;
    });
    CHECK_FALSE(big.precomputed());
    const auto& first = big.at(Hypothesis::of(14, {3}));
    const auto& again = big.at(Hypothesis::of(14, {3}));
    CHECK(&first == &again);
    CHECK(first[0] == 0.5);

    TargetTable small(3, [](const Hypothesis&) {
        AllocationVector a;
        a.c = {0.5, 0.25, 0.25};
        return a;
    });
    CHECK(small.precomputed());
    CHECK(small.all_positive());
}

TEST_CASE("consistency time") {
    const auto A = Hypothesis::of(3, {0});
    const std::vector<Hypothesis> trace = {Hypothesis::empty(3), A, A, A};
    CHECK(consistency_time(trace, A) == 2);
    CHECK_FALSE(consistency_time(std::vector<Hypothesis>{Hypothesis::empty(3)}, A).has_value());
    CHECK(consistency_time(std::vector<Hypothesis>{A}, A) == 1);
    const std::vector<Hypothesis> relapse = {A, Hypothesis::empty(3), A};
    CHECK(consistency_time(relapse, A) == 3);
}

TEST_CASE("Clopper-Pearson bounds") {
    const auto none = clopper_pearson(0, 10000);
    CHECK(none.rate == 0.0);
    CHECK(none.lower == 0.0);
    CHECK(none.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 10000)).epsilon(1e-6));
    const auto half = clopper_pearson(50, 100);
    CHECK(half.lower == doctest::Approx(0.3983).epsilon(1e-3));
    CHECK(half.upper == doctest::Approx(0.6017).epsilon(1e-3));
}

TEST_CASE("mean and standard error") {
    const std::vector<double> one = {4.0};
    const auto m1 = mean_and_se(one);
    CHECK(m1.mean == 4.0);
    CHECK(std::isnan(m1.se));
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    const auto m = mean_and_se(v);
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
