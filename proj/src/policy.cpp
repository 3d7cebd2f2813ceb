#include "anomid/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anomid/error.hpp"

namespace anomid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log C(m, k) via lgamma in long double.
double log_binomial(int m, int k) {
    if (k < 0 || k > m) throw InvalidArgument("binomial coefficient needs 0 <= k <= M");
    const long double v = std::lgamma(static_cast<long double>(m) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                          std::lgamma(static_cast<long double>(m - k) + 1);
    return static_cast<double>(v);
}

void validate_error_target(double p, const char* name) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
}

// Sources split by sign and sorted by |llr|, ties by id.
struct SignedOrder {
    std::vector<int> hat;    // llr >= 0, ascending
    std::vector<int> check;  // llr < 0, ascending magnitude
};

SignedOrder order_by_sign(std::span<const double> llr) {
    SignedOrder o;
    for (int i = 0; i < static_cast<int>(llr.size()); ++i) (llr[i] >= 0.0 ? o.hat : o.check).push_back(i);
    auto by_mag = [&](int a, int b) {
        const double ma = std::abs(llr[a]);
        const double mb = std::abs(llr[b]);
        return ma < mb || (ma == mb && a < b);
    };
    std::sort(o.hat.begin(), o.hat.end(), by_mag);
    std::sort(o.check.begin(), o.check.end(), by_mag);
    return o;
}

// Sum of the sorted magnitudes at 1-based positions [from, to], +inf past the end.
double padded_sum(std::span<const double> llr, const std::vector<int>& order, int from, int to) {
    double s = 0.0;
    for (int i = from; i <= to; ++i) {
        if (i > static_cast<int>(order.size())) return kInf;
        s += std::abs(llr[order[i - 1]]);
    }
    return s;
}

}  // namespace

RunState RunState::initial(int num_sources) {
    RunState s;
    s.llr.assign(static_cast<std::size_t>(num_sources), 0.0);
    s.count.assign(static_cast<std::size_t>(num_sources), 0);
    s.estimate = Hypothesis::full(num_sources);
    return s;
}

std::int64_t RunState::samples_taken() const noexcept { return std::accumulate(count.begin(), count.end(), std::int64_t{0}); }

void update_llrs(RunState& state, std::span<const SourceModel> models, const Hypothesis& sampled,
                 std::span<const double> observations) {
    const int m = state.num_sources();
    if (static_cast<int>(models.size()) != m || sampled.num_sources() != m) {
        throw InvalidArgument("state, models and sampled set disagree on the number of sources");
    }
    if (static_cast<std::size_t>(sampled.size()) != observations.size()) {
        throw InvalidArgument("expected one observation per sampled source");
    }
    std::size_t j = 0;
    for (int i = 0; i < m; ++i) {
        if (!sampled.contains(i)) continue;
        state.llr[i] += models[i].llr(observations[j++]);
        ++state.count[i];
    }
    ++state.n;
    std::uint64_t mask = 0;
    for (int i = 0; i < m; ++i) {
        if (state.llr[i] >= 0.0) mask |= std::uint64_t{1} << i;
    }
    state.estimate = Hypothesis(m, mask);
}

std::string to_string(StopKind kind) {
    switch (kind) {
        case StopKind::None: return "NONE";
        case StopKind::SumIntersection: return "SUM_INT";
        case StopKind::LeapHat: return "LEAP_HAT";
        case StopKind::LeapCheck: return "LEAP_CHECK";
    }
    return "UNKNOWN";
}

double threshold_misclass(double alpha, int num_sources, int k) {
    validate_error_target(alpha, "alpha");
    if (k < 1 || k > num_sources) throw InvalidArgument("k must be in [1, M]");
    return std::abs(std::log(alpha)) + log_binomial(num_sources, k);
}

LeapThresholds thresholds_familywise(double alpha, double beta, int num_sources, int k1, int k2) {
    validate_error_target(alpha, "alpha");
    validate_error_target(beta, "beta");
    if (k1 < 1 || k2 < 1 || k1 + k2 > num_sources) throw InvalidArgument("need k1, k2 >= 1 and k1 + k2 <= M");
    const double ln2 = std::log(2.0);
    LeapThresholds t;
    t.a = std::abs(std::log(beta)) + k2 * ln2 + log_binomial(num_sources, k2);
    t.b = std::abs(std::log(alpha)) + k1 * ln2 + log_binomial(num_sources, k1);
    return t;
}

double sum_intersection_statistic(std::span<const double> llr, int k) {
    if (k < 1 || k > static_cast<int>(llr.size())) throw InvalidArgument("k must be in [1, M]");
    std::vector<double> mag(llr.size());
    std::transform(llr.begin(), llr.end(), mag.begin(), [](double v) { return std::abs(v); });
    std::nth_element(mag.begin(), mag.begin() + (k - 1), mag.end());
    return std::accumulate(mag.begin(), mag.begin() + k, 0.0);
}

StopDecision check_sum_intersection(std::span<const double> llr, int k, double d) {
    StopDecision out;
    if (sum_intersection_statistic(llr, k) < d) return out;
    const int m = static_cast<int>(llr.size());
    std::uint64_t mask = 0;
    for (int i = 0; i < m; ++i) {
        if (llr[i] > 0.0) mask |= std::uint64_t{1} << i;
    }
    out.stopped = true;
    out.decided = Hypothesis(m, mask);
    out.kind = StopKind::SumIntersection;
    return out;
}

std::vector<LeapCondition> leap_conditions(std::span<const double> llr, int k1, int k2) {
    const int m = static_cast<int>(llr.size());
    if (k1 < 1 || k2 < 1 || k1 + k2 > m) throw InvalidArgument("need k1, k2 >= 1 and k1 + k2 <= M");
    const SignedOrder o = order_by_sign(llr);
    const int p = static_cast<int>(o.hat.size());
    const int negatives = m - p;

    std::uint64_t positive_mask = 0;
    for (int i : o.hat) positive_mask |= std::uint64_t{1} << i;

    std::vector<LeapCondition> out;
    out.reserve(static_cast<std::size_t>(k1 + k2 - 1));
    for (int l = 0; l < k1; ++l) {
        LeapCondition c;
        c.kind = StopKind::LeapHat;
        c.l = l;
        c.b_sum = padded_sum(llr, o.hat, 1, k1 - l);
        c.a_sum = padded_sum(llr, o.check, 1 + l, k2 + l);
        std::uint64_t mask = positive_mask;
        for (int i = 0; i < std::min(l, negatives); ++i) mask |= std::uint64_t{1} << o.check[i];
        c.decided = Hypothesis(m, mask);
        out.push_back(c);
    }
    for (int l = 1; l < k2; ++l) {
        LeapCondition c;
        c.kind = StopKind::LeapCheck;
        c.l = l;
        c.b_sum = padded_sum(llr, o.hat, 1 + l, k1 + l);
        c.a_sum = padded_sum(llr, o.check, 1, k2 - l);
        std::uint64_t mask = positive_mask;
        for (int i = 0; i < std::min(l, p); ++i) mask &= ~(std::uint64_t{1} << o.hat[i]);
        c.decided = Hypothesis(m, mask);
        out.push_back(c);
    }
    return out;
}

StopDecision check_leap(std::span<const double> llr, int k1, int k2, double a, double b) {
    StopDecision out;
    for (const LeapCondition& c : leap_conditions(llr, k1, k2)) {
        if (c.b_sum >= b && c.a_sum >= a) {
            out.stopped = true;
            out.decided = c.decided;
            out.kind = c.kind;
            out.l = c.l;
            return out;
        }
    }
    return out;
}

double leap_statistic(std::span<const double> llr, int k1, int k2, double a0, double b0) {
    double best = -kInf;
    for (const LeapCondition& c : leap_conditions(llr, k1, k2)) best = std::max(best, std::min(c.b_sum - b0, c.a_sum - a0));
    return best;
}

}  // namespace anomid
