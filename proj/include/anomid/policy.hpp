#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anomid/model.hpp"

namespace anomid {

// Running statistics of one trial: local LLRs, per-source sample counts and
// the estimate D_n = {i : llr_i >= 0}.
struct RunState {
    std::int64_t n = 0;
    std::vector<double> llr;
    std::vector<std::int64_t> count;
    Hypothesis estimate;  // all sources at n = 0, since every LLR starts at 0

    static RunState initial(int num_sources);

    int num_sources() const noexcept { return static_cast<int>(llr.size()); }
    std::int64_t samples_taken() const noexcept;
};

// Adds one time step: `observations[j]` is the value drawn from the j-th
// member of `sampled` in ascending source order. Unsampled sources keep
// their LLR. Throws InvalidArgument when the counts disagree.
void update_llrs(RunState& state, std::span<const SourceModel> models, const Hypothesis& sampled,
                 std::span<const double> observations);

enum class StopKind { None, SumIntersection, LeapHat, LeapCheck };

std::string to_string(StopKind kind);

struct StopDecision {
    bool stopped = false;
    Hypothesis decided;  // meaningful only when stopped
    StopKind kind = StopKind::None;
    int l = 0;  // the leap index that fired
};

// d = |log alpha| + log C(M, k), in nats.
double threshold_misclass(double alpha, int num_sources, int k);

struct LeapThresholds {
    double a = 0.0;  // negative-LLR side, tied to beta
    double b = 0.0;  // positive-LLR side, tied to alpha
};

// a = |log beta| + log(2^k2 C(M, k2)),  b = |log alpha| + log(2^k1 C(M, k1)).
LeapThresholds thresholds_familywise(double alpha, double beta, int num_sources, int k1, int k2);

// Stops once the k smallest |llr| sum to at least d; declares {i : llr_i > 0}.
StopDecision check_sum_intersection(std::span<const double> llr, int k, double d);

// Sum of the k smallest |llr|: the largest d at which check_sum_intersection stops.
double sum_intersection_statistic(std::span<const double> llr, int k);

// One paired condition of the leap rule, evaluated on a state.
struct LeapCondition {
    StopKind kind = StopKind::LeapHat;
    int l = 0;
    double b_sum = 0.0;  // compared with b
    double a_sum = 0.0;  // compared with a
    Hypothesis decided;  // decision if this condition fires
};

// All conditions in scan order: hat(0..k1-1), then check(1..k2-1).
std::vector<LeapCondition> leap_conditions(std::span<const double> llr, int k1, int k2);

// Leap rule. Conditions are scanned hat(0..k1-1) then check(1..k2-1); the
// first one satisfied determines the decision.
StopDecision check_leap(std::span<const double> llr, int k1, int k2, double a, double b);

// Largest shift s at which check_leap(llr, k1, k2, a0 + s, b0 + s) stops.
double leap_statistic(std::span<const double> llr, int k1, int k2, double a0, double b0);

inline StopDecision check_sum_intersection(const RunState& s, int k, double d) {
    return check_sum_intersection(s.llr, k, d);
}
inline StopDecision check_leap(const RunState& s, int k1, int k2, double a, double b) {
    return check_leap(s.llr, k1, k2, a, b);
}

}  // namespace anomid
