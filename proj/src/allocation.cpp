#include "anomid/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anomid/error.hpp"

namespace anomid {

namespace {

// Relative margin a later candidate must beat the incumbent by; ties keep the
// earlier (lower case index, then smaller l) candidate.
constexpr double kTieTolerance = 1e-9;

void validate_budget(double K, int m) {
    if (!std::isfinite(K) || !(K > 0.0) || K > m) {
        throw InvalidArgument("budget K must be in (0, M] = (0, " + std::to_string(m) + "]");
    }
}

void validate_models(std::span<const SourceModel> models, const Hypothesis& A) {
    if (models.empty()) throw InvalidArgument("at least one source is required");
    if (static_cast<int>(models.size()) != A.num_sources()) {
        throw InvalidArgument("hypothesis size does not match the number of sources");
    }
}

DifficultyReport v_report(DifficultyCase kind, int l, OrderedKlSet list, int kappa, double K, double scale) {
    DifficultyReport rep;
    rep.kind = kind;
    rep.l_A = l;
    rep.kappa1 = kappa;
    rep.v_solution = solve_v(kappa, K, list);
    rep.value = scale * rep.v_solution->value;
    rep.list1 = std::move(list);
    return rep;
}

DifficultyReport w_report(DifficultyCase kind, int l, OrderedKlSet list1, OrderedKlSet list2, int kappa1,
                          int kappa2, double K, double r) {
    DifficultyReport rep;
    rep.kind = kind;
    rep.l_A = l;
    rep.kappa1 = kappa1;
    rep.kappa2 = kappa2;
    rep.w_solution = solve_w(kappa1, kappa2, K, list1, list2, r);
    rep.value = rep.w_solution->value;
    rep.list1 = std::move(list1);
    rep.list2 = std::move(list2);
    return rep;
}

}  // namespace

std::string to_string(DifficultyCase c) {
    switch (c) {
        case DifficultyCase::Misclass: return "MISCLASS";
        case DifficultyCase::FwV1: return "FW_V1";
        case DifficultyCase::FwV2: return "FW_V2";
        case DifficultyCase::FwV3: return "FW_V3";
        case DifficultyCase::FwV4: return "FW_V4";
        case DifficultyCase::FwEmpty: return "FW_EMPTY";
        case DifficultyCase::FwFull: return "FW_FULL";
    }
    return "UNKNOWN";
}

double AllocationVector::total() const noexcept { return std::accumulate(c.begin(), c.end(), 0.0); }

bool AllocationVector::in_budget(double K, double tol) const noexcept {
    for (double ci : c) {
        if (!(ci >= -tol) || !(ci <= 1.0 + tol)) return false;
    }
    return total() <= K + tol;
}

double error_ratio(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw InvalidArgument("error targets must lie in (0, 1)");
    }
    return std::abs(std::log(alpha)) / std::abs(std::log(beta));
}

DifficultyReport difficulty_misclass(std::span<const SourceModel> models, const Hypothesis& A, int k, double K) {
    validate_models(models, A);
    const int m = static_cast<int>(models.size());
    validate_budget(K, m);
    if (k < 1 || k > m) throw InvalidArgument("k must be in [1, M]");
    return v_report(DifficultyCase::Misclass, 0, build_f_set(models, A), k, K, 1.0);
}

std::vector<DifficultyReport> familywise_candidates(std::span<const SourceModel> models, const Hypothesis& A,
                                                    int k1, int k2, double K, double r) {
    validate_models(models, A);
    const int m = static_cast<int>(models.size());
    validate_budget(K, m);
    if (k1 < 1 || k2 < 1 || k1 + k2 > m) {
        throw InvalidArgument("familywise tolerances need k1, k2 >= 1 and k1 + k2 <= M");
    }
    if (!std::isfinite(r) || !(r > 0.0)) throw InvalidArgument("ratio r must be positive and finite");

    std::vector<DifficultyReport> out;
    const IjSets sets = build_ij_sets(models, A);
    if (A.is_empty()) {
        out.push_back(v_report(DifficultyCase::FwEmpty, k1 - 1, sets.J.tail(k1 - 1), k2, K, 1.0));
        return out;
    }
    if (A.is_full()) {
        out.push_back(v_report(DifficultyCase::FwFull, k2 - 1, sets.I.tail(k2 - 1), k1, K, 1.0));
        return out;
    }

    const int n_in = A.size();
    const int n_out = m - n_in;

    if (k2 <= n_out) {
        const int lo = std::max(0, k1 - n_in);
        const int hi = std::min(k1 - 1, n_out - k2);
        if (lo > hi) throw SolverError("empty l-range for the J-trimmed W quantity");
        for (int l = lo; l <= hi; ++l) {
            out.push_back(w_report(DifficultyCase::FwV1, l, sets.I, sets.J.tail(l), k1 - l, k2, K, r));
        }
    }
    if (k1 <= n_in) {
        const int lo = std::max(0, k2 - n_out);
        const int hi = std::min(k2 - 1, n_in - k1);
        if (lo > hi) throw SolverError("empty l-range for the I-trimmed W quantity");
        for (int l = lo; l <= hi; ++l) {
            out.push_back(w_report(DifficultyCase::FwV2, l, sets.I.tail(l), sets.J, k1, k2 - l, K, r));
        }
    }
    if (k1 - 1 >= n_out - k2 + 1) {
        const int l = std::max(0, n_out - k2 + 1);
        out.push_back(v_report(DifficultyCase::FwV3, l, sets.I, k1 - l, K, 1.0));
    }
    if (k2 - 1 >= n_in - k1 + 1) {
        const int l = std::max(0, n_in - k1 + 1);
        out.push_back(v_report(DifficultyCase::FwV4, l, sets.J, k2 - l, K, r));
    }
    return out;
}

DifficultyReport difficulty_familywise(std::span<const SourceModel> models, const Hypothesis& A, int k1, int k2,
                                       double K, double r) {
    std::vector<DifficultyReport> candidates = familywise_candidates(models, A, k1, k2, K, r);
    if (candidates.empty()) throw SolverError("no applicable familywise quantity");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double incumbent = candidates[best].value;
        if (candidates[i].value > incumbent + kTieTolerance * std::max(1.0, std::abs(incumbent))) best = i;
    }
    return std::move(candidates[best]);
}

AllocationVector allocation_from_report(const DifficultyReport& report, int num_sources) {
    AllocationVector out;
    out.c.assign(static_cast<std::size_t>(num_sources), 0.0);
    auto scatter = [&](const OrderedKlSet& list, const std::vector<double>& c_prime) {
        for (std::size_t p = 0; p < list.size(); ++p) out.c[static_cast<std::size_t>(list.source_of(p))] = c_prime[p];
    };
    if (report.w_solution) {
        scatter(report.list1, report.w_solution->branch1.c_prime);
        scatter(report.list2, report.w_solution->branch2.c_prime);
    } else if (report.v_solution) {
        scatter(report.list1, report.v_solution->c_prime);
    }
    return out;
}

AllocationVector c_star_misclass(std::span<const SourceModel> models, const Hypothesis& A, int k, double K) {
    return allocation_from_report(difficulty_misclass(models, A, k, K), static_cast<int>(models.size()));
}

AllocationVector c_star_familywise(std::span<const SourceModel> models, const Hypothesis& A, int k1, int k2,
                                   double K, double r) {
    return allocation_from_report(difficulty_familywise(models, A, k1, k2, K, r), static_cast<int>(models.size()));
}

}  // namespace anomid
