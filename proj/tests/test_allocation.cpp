#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "anomid/allocation.hpp"
#include "anomid/error.hpp"
#include "oracles.hpp"
#include "reference_setup.hpp"

using namespace anomid;

namespace {

const auto kModels = testutil::reference_models();
const auto kTruth = testutil::reference_truth();

std::set<int> listed_sources(const DifficultyReport& rep) {
    std::set<int> s(rep.list1.sources().begin(), rep.list1.sources().end());
    s.insert(rep.list2.sources().begin(), rep.list2.sources().end());
    return s;
}

}  // namespace

TEST_CASE("misclassification difficulty on the reference setup") {
    const auto F = build_f_set(kModels, kTruth);
    const double tail = harmonic_tail(F.values(), 1);
    const auto rep = difficulty_misclass(kModels, kTruth, 5, 5.0);
    CHECK(rep.kind == DifficultyCase::Misclass);
    CHECK(rep.value == doctest::Approx(5 * 0.5 * tail));
    CHECK(rep.value == doctest::Approx(0.5397).epsilon(1e-3));
}

TEST_CASE("misclassification difficulty with equal KL numbers is k*(K/M)*I") {
    const auto models = gaussian_sources(std::vector<double>(6, 0.8));
    const auto A = Hypothesis::of(6, {1, 4});
    const double K = 2.5;
    for (int k = 1; k <= 6; ++k) {
        CHECK(difficulty_misclass(models, A, k, K).value == doctest::Approx(k * (K / 6) * 0.32));
        const auto c = c_star_misclass(models, A, k, K);
        CHECK(c.total() == doctest::Approx(K));
        // At full tolerance any allocation of the whole budget is optimal.
        if (k < 6) {
            for (double ci : c.c) CHECK(ci == doctest::Approx(K / 6));
        }
    }
}

TEST_CASE("full budget and full tolerance give the total") {
    const auto rep = difficulty_misclass(kModels, kTruth, 10, 10.0);
    CHECK(rep.value == doctest::Approx(0.375 + 0.98 + 1.5));
}

TEST_CASE("single source takes the whole budget") {
    const auto models = gaussian_sources(std::vector<double>{1.0});
    const auto c = c_star_misclass(models, Hypothesis::full(1), 1, 1.0);
    CHECK(c.c.at(0) == doctest::Approx(1.0));
}

TEST_CASE("familywise tolerance bound") {
    CHECK_THROWS_AS(difficulty_familywise(kModels, kTruth, 6, 5, 5.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(difficulty_familywise(kModels, kTruth, 0, 1, 5.0, 1.0), InvalidArgument);
}

TEST_CASE("familywise k1=k2=1: J-trimmed balance with nothing trimmed") {
    const auto rep = difficulty_familywise(kModels, kTruth, 1, 1, 5.0, 1.0);
    CHECK(rep.kind == DifficultyCase::FwV1);
    CHECK(rep.l_A == 0);
    REQUIRE(rep.w_solution);
    CHECK(rep.w_solution->branch1.y == doctest::Approx(0.69).epsilon(0.015));
    CHECK(rep.w_solution->branch2.y == doctest::Approx(0.30).epsilon(0.02));
    CHECK_FALSE(rep.w_solution->branch1.has_x());
    CHECK_FALSE(rep.w_solution->branch2.has_x());
}

TEST_CASE("familywise k1=k2=3: I-trimmed balance with one trimmed") {
    const auto rep = difficulty_familywise(kModels, kTruth, 3, 3, 5.0, 1.0);
    CHECK(rep.kind == DifficultyCase::FwV2);
    CHECK(rep.l_A == 1);
    REQUIRE(rep.w_solution);
    const auto& w = *rep.w_solution;
    CHECK(std::abs(w.branch1.y - 0.66) <= 0.01);
    CHECK(std::abs(w.branch2.y - 0.46) <= 0.01);
    const double tail = harmonic_tail(rep.list1.values(), 1);
    CHECK(rep.value == doctest::Approx(3 * w.branch1.y * tail));
    CHECK(w.value == doctest::Approx((3 - 1) * w.branch2.y * harmonic_tail(rep.list2.values(), 1)));
}

TEST_CASE("familywise k1=k2=4 balances exactly within the budget") {
    const auto rep = difficulty_familywise(kModels, kTruth, 4, 4, 5.0, 1.0);
    CHECK(rep.kind == DifficultyCase::FwV2);
    CHECK(rep.l_A == 1);
    REQUIRE(rep.w_solution);
    const auto& w = *rep.w_solution;
    // I_1(A) = (0.125, 0.125, 0.245, 0.245) at tolerance 4, J(A) at tolerance 3.
    // Branch 1 sits at 2 + x1 with value 0.49 + 0.125 x1; branch 2 is 3 * y2 * harmonic tail of J(A).
    const double hj = harmonic_tail(rep.list2.values(), 1);
    CHECK(w.K1_star + w.K2_star == doctest::Approx(5.0));
    CHECK(w.branch1.x == doctest::Approx(w.K1_star - 2.0));
    CHECK(w.value == doctest::Approx(0.49 + 0.125 * w.branch1.x));
    CHECK(w.value2 == doctest::Approx(3 * (w.K2_star / 5.0) * hj));
    CHECK(w.branch1.x == doctest::Approx(0.4318).epsilon(1e-3));
    CHECK(w.branch2.y == doctest::Approx(0.5136).epsilon(1e-3));
    const auto c = allocation_from_report(rep, 10);
    // The dropped source is the lowest-rate anomalous source.
    CHECK(c.c[0] == 0.0);
}

TEST_CASE("familywise k1=k2=5: the J-side quantity with one leap dominates") {
    const auto cands = familywise_candidates(kModels, kTruth, 5, 5, 5.0, 1.0);
    const auto rep = difficulty_familywise(kModels, kTruth, 5, 5, 5.0, 1.0);
    CHECK(rep.kind == DifficultyCase::FwV4);
    CHECK(rep.l_A == 1);
    CHECK(rep.value == doctest::Approx(0.245 + 0.245 + 0.5 + 0.5));
    bool saw_w = false;
    for (const auto& cd : cands) {
        if (cd.kind == DifficultyCase::FwV1) {
            saw_w = true;
            CHECK(cd.value < rep.value);
        }
    }
    CHECK(saw_w);
}

TEST_CASE("empty and full hypotheses reduce to one list") {
    const auto rep = difficulty_familywise(kModels, Hypothesis::empty(10), 1, 2, 5.0, 1.0);
    CHECK(rep.kind == DifficultyCase::FwEmpty);
    const auto J = build_j_set(kModels, Hypothesis::empty(10));
    CHECK(rep.value == doctest::Approx(solve_v(2, 5.0, J).value));

    const auto full = difficulty_familywise(kModels, Hypothesis::full(10), 3, 1, 5.0, 1.0);
    CHECK(full.kind == DifficultyCase::FwFull);
    const auto I = build_i_set(kModels, Hypothesis::full(10));
    const auto c = c_star_familywise(kModels, Hypothesis::full(10), 3, 1, 5.0, 1.0);
    const auto cp = solve_v(3, 5.0, I).c_prime;
    for (std::size_t p = 0; p < I.size(); ++p) CHECK(c.c[I.source_of(p)] == doctest::Approx(cp[p]));
}

TEST_CASE("allocations stay in the budget and vanish outside the solved lists") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 80; ++trial) {
        const std::uint64_t mask = rng() & 0x3FF;
        const Hypothesis A(10, mask);
        const double K = std::uniform_real_distribution<double>(0.5, 10.0)(rng);
        const int k1 = 1 + static_cast<int>(rng() % 5);
        const int k2 = 1 + static_cast<int>(rng() % 5);
        const double r = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        CAPTURE(trial);
        const auto rep = difficulty_familywise(kModels, A, k1, k2, K, r);
        const auto c = allocation_from_report(rep, 10);
        CHECK(c.in_budget(K, 1e-9));
        const auto listed = listed_sources(rep);
        for (int i = 0; i < 10; ++i) {
            if (!listed.count(i)) CHECK(c.c[i] == 0.0);
            CHECK(c.c[i] >= 0.0);
            CHECK(c.c[i] <= 1.0);
        }
        const int k = 1 + static_cast<int>(rng() % 10);
        CHECK(c_star_misclass(kModels, A, k, K).in_budget(K, 1e-9));
    }
}

TEST_CASE("difficulty grows at least linearly in the tolerance") {
    const double v1 = difficulty_misclass(kModels, kTruth, 1, 5.0).value;
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double v = difficulty_misclass(kModels, kTruth, k, 5.0).value;
        CHECK(v >= k * v1 - 1e-12);
        CHECK(v / k >= prev - 1e-12);
        prev = v / k;
    }
}

TEST_CASE("misclassification allocation reproduces the value through the source map") {
    for (int k = 1; k <= 10; ++k) {
        const auto rep = difficulty_misclass(kModels, kTruth, k, 5.0);
        const auto c = allocation_from_report(rep, 10);
        std::vector<double> by_position(10);
        for (std::size_t p = 0; p < 10; ++p) by_position[p] = c.c[rep.list1.source_of(p)];
        CHECK(testutil::kappa_sum(k, by_position, rep.list1.values()) == doctest::Approx(rep.value));
    }
}

TEST_CASE("familywise difficulty is the largest applicable quantity") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const Hypothesis A(10, 1 + rng() % 1022);
        const int k1 = 1 + static_cast<int>(rng() % 5);
        const int k2 = 1 + static_cast<int>(rng() % 5);
        const auto best = difficulty_familywise(kModels, A, k1, k2, 5.0, 1.3);
        for (const auto& c : familywise_candidates(kModels, A, k1, k2, 5.0, 1.3)) {
            CHECK(best.value >= c.value * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("error ratio") {
    CHECK(error_ratio(1e-10, 1e-5) == doctest::Approx(2.0));
    CHECK_THROWS_AS(error_ratio(0.0, 0.5), InvalidArgument);
}
