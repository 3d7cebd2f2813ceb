#pragma once

#include <span>
#include <vector>

#include "anomid/model.hpp"

namespace anomid {

// Solvers for the two budgeted max-min allocation problems.
//
// The single-list problem, for an ascending list L of positive rates, a tolerance kappa and
// a budget K:
//
//     V(kappa, K, L) = max_{c in [0,1]^|L|, sum c <= K}  (sum of the kappa
//                      smallest products c_i * L_i)
//
// The two-list problem balances two such lists against each other at ratio r:
//
//     W = max_c min{ V-objective(c_hat; kappa1, L1), r * V-objective(c_check; kappa2, L2) }
//
// Positions u, v and the `from` argument of harmonic_tail are 1-based, the
// way the structural parameters are usually reported; allocation vectors are
// ordinary 0-based arrays aligned with L.

struct SolutionV {
    double value = 0.0;
    double x = 0.0;  // fractional allocation of position v-1 (when v >= 2)
    double y = 0.0;  // common level of the tail above u, divided by its harmonic mean
    int u = 0;
    int v = 0;
    std::vector<double> c_prime;  // minimal-L1-norm maximizer, aligned with L

    // Whether x / y actually enter the value (a "-" in tabulated output otherwise).
    bool has_x() const noexcept { return v >= 2 && x > 0.0; }
    bool has_y(int kappa) const noexcept { return u < kappa; }
};

struct SolutionW {
    double value = 0.0;   // V(kappa1, K1*, L1)
    double value2 = 0.0;  // r * V(kappa2, K2*, L2); equal to value up to bisection tolerance
    double K1_star = 0.0;
    double K2_star = 0.0;
    SolutionV branch1;  // solve_v(kappa1, K1*, L1); c_hat = branch1.c_prime
    SolutionV branch2;  // solve_v(kappa2, K2*, L2); c_check = branch2.c_prime
};

// Harmonic mean of the |L| - from + 1 largest entries; +infinity at from = |L| + 1.
double harmonic_tail(std::span<const double> L, int from);

// Budget above which V(kappa, ., L) stops growing: kappa + L_kappa * sum_{i > kappa} 1/L_i.
double saturation_budget(int kappa, std::span<const double> L);

// Solves the single-list problem. Accepts K >= 0 (K = 0 gives the zero allocation); budgets
// past saturation_budget() are treated as saturated.
SolutionV solve_v(int kappa, double K, std::span<const double> L);
inline SolutionV solve_v(int kappa, double K, const OrderedKlSet& L) { return solve_v(kappa, K, L.values()); }

// Sum of the kappa smallest c_i * L_i.
double min_kappa_sum(int kappa, std::span<const double> c, std::span<const double> L);

// Grid lower bound on V(kappa, K, L), independent of solve_v. Uses the
// identity  sum of kappa smallest p_i = max_theta [kappa*theta - sum (theta - p_i)^+]
// with theta scanned over a grid of spacing grid_step * max(L) / |L|, and the
// inner minimization over D(K) solved exactly by the fractional-knapsack greedy.
// The result is at most grid_step * max(L) below V.
double brute_force_v(int kappa, double K, std::span<const double> L, double grid_step);

// Solves the two-list problem by the two-bisection budget split.
SolutionW solve_w(int kappa1, int kappa2, double K, std::span<const double> L1, std::span<const double> L2,
                  double r);
inline SolutionW solve_w(int kappa1, int kappa2, double K, const OrderedKlSet& L1, const OrderedKlSet& L2,
                         double r) {
    return solve_w(kappa1, kappa2, K, L1.values(), L2.values(), r);
}

}  // namespace anomid
