#include "anomid/maxmin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "anomid/error.hpp"

namespace anomid {

namespace {

// Residual budget at or below this is treated as spent.
constexpr double kBudgetEps = 1e-12;
// Slack toward the ">=" branch when comparing L_{v-1} with the tail level.
constexpr double kTieSlack = 1e-12;
constexpr double kBisectTol = 1e-12;
constexpr int kBisectMaxIter = 200;

void validate_list(std::span<const double> L, const char* what) {
    if (L.empty()) throw InvalidArgument(std::string(what) + " must be non-empty");
    double prev = 0.0;
    for (double value : L) {
        if (!std::isfinite(value) || !(value > 0.0)) {
            throw InvalidArgument(std::string(what) + " entries must be positive and finite");
        }
        if (value < prev) throw InvalidArgument(std::string(what) + " must be sorted ascending");
        prev = value;
    }
}

void validate_kappa(int kappa, std::size_t n, const char* what) {
    if (kappa < 1 || static_cast<std::size_t>(kappa) > n) {
        throw InvalidArgument(std::string(what) + " must be in [1, |L|] = [1, " + std::to_string(n) + "], got " +
                              std::to_string(kappa));
    }
}

// 1-based views of L and its reciprocal suffix sums.
class Tails {
public:
    explicit Tails(std::span<const double> L) : L_(L), n_(static_cast<int>(L.size())), inv_(L.size() + 2, 0.0) {
        for (int i = n_; i >= 1; --i) inv_[i] = inv_[i + 1] + 1.0 / L_[i - 1];
    }

    int n() const noexcept { return n_; }

    // L_i with L_0 = 0.
    double at(int i) const noexcept { return i == 0 ? 0.0 : L_[i - 1]; }

    // sum_{j >= i} 1/L_j, zero past the end.
    double inv_from(int i) const noexcept { return inv_[i]; }

    double harmonic(int i) const noexcept {
        if (i == n_ + 1) return std::numeric_limits<double>::infinity();
        return (n_ - i + 1) / inv_[i];
    }

    // Budget needed to raise positions i..n to the product level L_i.
    double cap(int i) const noexcept { return at(i) * inv_[i]; }

    // Budget held by positions i+1..n when their products sit at level L_i.
    double cap_after(int i) const noexcept { return at(i) * inv_[i + 1]; }

private:
    std::span<const double> L_;
    int n_;
    std::vector<double> inv_;
};

double sum_smallest(std::span<const double> L, int kappa) {
    double s = 0.0;
    for (int i = 0; i < kappa; ++i) s += L[i];
    return s;
}

// Root of an increasing function with f(lo) < 0 <= f(hi).
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi, bool return_upper) {
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (!(f_lo < 0.0) || !(f_hi >= 0.0)) {
        throw SolverError("budget split bisection is not bracketed: f(" + std::to_string(lo) +
                          ") = " + std::to_string(f_lo) + ", f(" + std::to_string(hi) + ") = " + std::to_string(f_hi));
    }
    for (int iter = 0; iter < kBisectMaxIter && hi - lo > kBisectTol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return return_upper ? hi : 0.5 * (lo + hi);
}

}  // namespace

double harmonic_tail(std::span<const double> L, int from) {
    validate_list(L, "L");
    const int n = static_cast<int>(L.size());
    if (from < 1 || from > n + 1) {
        throw InvalidArgument("harmonic_tail start must be in [1, |L|+1], got " + std::to_string(from));
    }
    return Tails(L).harmonic(from);
}

double saturation_budget(int kappa, std::span<const double> L) {
    validate_list(L, "L");
    validate_kappa(kappa, L.size(), "kappa");
    return kappa + Tails(L).cap_after(kappa);
}

double min_kappa_sum(int kappa, std::span<const double> c, std::span<const double> L) {
    if (c.size() != L.size()) throw InvalidArgument("allocation and rate lists differ in length");
    validate_kappa(kappa, L.size(), "kappa");
    std::vector<double> products(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) products[i] = c[i] * L[i];
    std::nth_element(products.begin(), products.begin() + (kappa - 1), products.end());
    std::sort(products.begin(), products.begin() + kappa);
    return std::accumulate(products.begin(), products.begin() + kappa, 0.0);
}

SolutionV solve_v(int kappa, double K, std::span<const double> L) {
    validate_list(L, "L");
    validate_kappa(kappa, L.size(), "kappa");
    if (!std::isfinite(K) || K < 0.0) throw InvalidArgument("budget K must be finite and >= 0");

    const Tails t(L);
    const int n = t.n();

    // Largest u in [0, kappa) whose tail level clears L_u; u = 0 always does.
    int u_star = 0;
    for (int u = kappa - 1; u >= 0; --u) {
        if (static_cast<double>(kappa - u) / (n - u) * t.harmonic(u + 1) >= t.at(u)) {
            u_star = u;
            break;
        }
    }

    SolutionV s;
    double z = 0.0;  // budget held by positions u+1..n
    if (K >= kappa + t.cap_after(kappa)) {
        s.x = 0.0;
        s.y = 0.0;
        s.v = 1;
        s.u = kappa;
    } else if (K < t.cap(u_star + 1)) {
        s.x = 0.0;
        s.v = 0;
        s.u = u_star;
        s.y = K / (n - u_star);
        z = K;
    } else {
        int u = u_star + 1;
        int v = u_star + 1;
        double x = 0.0;
        z = t.cap_after(u);
        double rem = K - t.cap(u_star + 1);
        for (int guard = 0; rem > kBudgetEps && guard < 4 * n + 16; ++guard) {
            const double level = u < kappa ? static_cast<double>(kappa - u) / (n - u) * t.harmonic(u + 1) : 0.0;
            if (u == kappa || t.at(v - 1) >= level - kTieSlack) {
                if (v <= 1) break;  // every position up to kappa already saturated
                if (rem >= 1.0) {
                    --v;
                    rem -= 1.0;
                } else {
                    x = rem;
                    rem = 0.0;
                }
            }
            if (u < kappa && (v == 1 || t.at(v - 1) < level - kTieSlack)) {
                const double room = t.cap(u + 1) - z;
                if (room <= rem) {
                    rem -= std::max(room, 0.0);
                    z = t.cap_after(u + 1);
                    ++u;
                } else {
                    z += rem;
                    rem = 0.0;
                }
            }
        }
        s.x = x;
        s.u = u;
        s.v = v;
        s.y = n > u ? z / (n - u) : 0.0;
    }

    // Value from the structural parameters.
    if (s.v == 0) {
        s.value = (kappa - s.u) * s.y * t.harmonic(s.u + 1);
    } else {
        double value = s.v >= 2 ? s.x * t.at(s.v - 1) : 0.0;
        for (int i = s.v; i <= s.u; ++i) value += t.at(i);
        if (s.u < kappa) value += (kappa - s.u) * s.y * t.harmonic(s.u + 1);
        s.value = value;
    }

    // Minimal-norm maximizer.
    s.c_prime.assign(static_cast<std::size_t>(n), 0.0);
    const double tail_level = s.u < kappa ? s.y * t.harmonic(s.u + 1) : t.at(kappa);
    for (int i = s.u + 1; i <= n; ++i) s.c_prime[i - 1] = std::min(1.0, tail_level / t.at(i));
    if (s.v >= 1) {
        for (int i = s.v; i <= s.u; ++i) s.c_prime[i - 1] = 1.0;
        if (s.v >= 2) s.c_prime[s.v - 2] = s.x;
    }
    return s;
}

double brute_force_v(int kappa, double K, std::span<const double> L, double grid_step) {
    validate_list(L, "L");
    validate_kappa(kappa, L.size(), "kappa");
    if (!(grid_step > 0.0) || grid_step > 0.1) throw InvalidArgument("grid_step must be in (0, 0.1]");
    if (!std::isfinite(K) || K < 0.0) throw InvalidArgument("budget K must be finite and >= 0");

    const std::size_t n = L.size();
    std::vector<std::size_t> by_rate(n);
    std::iota(by_rate.begin(), by_rate.end(), std::size_t{0});
    std::stable_sort(by_rate.begin(), by_rate.end(), [&](std::size_t a, std::size_t b) { return L[a] > L[b]; });

    // kappa*theta - min_{c in D(K)} sum_i (theta - c_i L_i)^+
    auto dual = [&](double theta) {
        double budget = K;
        double shortfall = 0.0;
        for (std::size_t i : by_rate) {
            const double c = std::max(0.0, std::min({1.0, theta / L[i], budget}));
            budget -= c;
            shortfall += std::max(0.0, theta - c * L[i]);
        }
        return kappa * theta - shortfall;
    };

    const double l_max = L.back();
    const double spacing = grid_step * l_max / static_cast<double>(n);
    const auto points = static_cast<long>(std::ceil(l_max / spacing));
    double best = 0.0;
    for (long j = 0; j <= points; ++j) best = std::max(best, dual(std::min(l_max, j * spacing)));
    return best;
}

SolutionW solve_w(int kappa1, int kappa2, double K, std::span<const double> L1, std::span<const double> L2,
                  double r) {
    validate_list(L1, "L1");
    validate_list(L2, "L2");
    validate_kappa(kappa1, L1.size(), "kappa1");
    validate_kappa(kappa2, L2.size(), "kappa2");
    if (!std::isfinite(r) || !(r > 0.0)) throw InvalidArgument("ratio r must be positive and finite");
    if (!std::isfinite(K) || !(K > 0.0)) throw InvalidArgument("budget K must be positive and finite");

    auto V1 = [&](double budget) { return solve_v(kappa1, std::max(0.0, budget), L1).value; };
    auto V2 = [&](double budget) { return solve_v(kappa2, std::max(0.0, budget), L2).value; };

    const double sat1 = saturation_budget(kappa1, L1);
    const double sat2 = saturation_budget(kappa2, L2);
    const double top1 = sum_smallest(L1, kappa1);
    const double top2 = sum_smallest(L2, kappa2);

    double k1_star = 0.0;
    double k2_star = 0.0;
    if (top1 <= r * top2) {
        // Smallest K2 at which branch 2 matches saturated branch 1.
        auto g = [&](double k2) { return r * V2(k2) - top1; };
        const double k2_match = g(sat2) <= 0.0 ? sat2 : bisect_increasing(g, 0.0, sat2, true);
        const double total = std::min(sat1 + k2_match, K);
        auto h = [&](double k1) { return V1(k1) - r * V2(total - k1); };
        k1_star = bisect_increasing(h, 0.0, total, false);
        k2_star = total - k1_star;
    } else {
        auto g = [&](double k1) { return V1(k1) - r * top2; };
        const double k1_match = g(sat1) <= 0.0 ? sat1 : bisect_increasing(g, 0.0, sat1, true);
        const double total = std::min(k1_match + sat2, K);
        auto h = [&](double k2) { return r * V2(k2) - V1(total - k2); };
        k2_star = bisect_increasing(h, 0.0, total, false);
        k1_star = total - k2_star;
    }

    SolutionW w;
    w.K1_star = k1_star;
    w.K2_star = k2_star;
    w.branch1 = solve_v(kappa1, k1_star, L1);
    w.branch2 = solve_v(kappa2, k2_star, L2);
    w.value = w.branch1.value;
    w.value2 = r * w.branch2.value;
    return w;
}

}  // namespace anomid
