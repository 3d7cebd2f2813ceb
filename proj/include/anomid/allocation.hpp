#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anomid/maxmin.hpp"
#include "anomid/model.hpp"

namespace anomid {

// Which quantity attains the problem difficulty.
//   Misclass - V(k, K, F(A))
//   FwV1     - W(k1 - l, k2, K, I(A), J_l(A), r)
//   FwV2     - W(k1, k2 - l, K, I_l(A), J(A), r)
//   FwV3     - V(k1 - l, K, I(A)),      l = (|A^c| - k2 + 1)^+
//   FwV4     - r * V(k2 - l, K, J(A)),  l = (|A| - k1 + 1)^+
//   FwEmpty  - V(k2, K, J_{k1-1}(A)) for A empty
//   FwFull   - V(k1, K, I_{k2-1}(A)) for A full
enum class DifficultyCase { Misclass, FwV1, FwV2, FwV3, FwV4, FwEmpty, FwFull };

std::string to_string(DifficultyCase c);

struct DifficultyReport {
    double value = 0.0;
    DifficultyCase kind = DifficultyCase::Misclass;
    int l_A = 0;
    int kappa1 = 0;  // tolerance the solver used on list1
    int kappa2 = 0;  // W cases only

    // Lists the winning solver ran on, kept for mapping positions back to sources.
    OrderedKlSet list1;
    OrderedKlSet list2;  // W cases only

    std::optional<SolutionV> v_solution;  // V cases
    std::optional<SolutionW> w_solution;  // W cases (K1*, K2* inside)
};

// Per-source target sampling frequencies, indexed by source id.
struct AllocationVector {
    std::vector<double> c;

    double total() const noexcept;
    bool in_budget(double K, double tol = 1e-12) const noexcept;
};

// |log alpha| / |log beta|.
double error_ratio(double alpha, double beta);

DifficultyReport difficulty_misclass(std::span<const SourceModel> models, const Hypothesis& A, int k, double K);

DifficultyReport difficulty_familywise(std::span<const SourceModel> models, const Hypothesis& A, int k1, int k2,
                                       double K, double r);

// Every applicable candidate of the familywise maximum, in evaluation order.
// Exposed for inspection and tests; difficulty_familywise picks the maximum.
std::vector<DifficultyReport> familywise_candidates(std::span<const SourceModel> models, const Hypothesis& A,
                                                    int k1, int k2, double K, double r);

AllocationVector c_star_misclass(std::span<const SourceModel> models, const Hypothesis& A, int k, double K);

AllocationVector c_star_familywise(std::span<const SourceModel> models, const Hypothesis& A, int k1, int k2,
                                   double K, double r);

// Maps the solver allocation of a report back onto source ids; sources the
// case construction leaves out get 0.
AllocationVector allocation_from_report(const DifficultyReport& report, int num_sources);

}  // namespace anomid
