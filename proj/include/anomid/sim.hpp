#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anomid/model.hpp"
#include "anomid/policy.hpp"
#include "anomid/sampler.hpp"
#include "anomid/stats.hpp"

namespace anomid {

enum class Metric {
    Misclass,    // at least k errors of any kind, sum-intersection rule
    Familywise,  // at least k1 false positives / k2 false negatives, leap rule
};

std::string to_string(Metric metric);
Metric parse_metric(const std::string& text);

struct Experiment {
    std::vector<SourceModel> models;
    Hypothesis truth;
    Metric metric = Metric::Misclass;
    int k = 1;
    int k1 = 1;
    int k2 = 1;
    double K = 1.0;
    double alpha = 1e-3;
    double beta = 1e-3;
    SamplerConfig sampler;  // sampler.K is overwritten with K
    std::int64_t horizon = 10'000'000;

    int num_sources() const noexcept { return static_cast<int>(models.size()); }
    // |log alpha| / |log beta|.
    double ratio() const;
    void validate() const;
};

struct Thresholds {
    double d = 0.0;  // sum-intersection
    double a = 0.0;  // leap, negative side
    double b = 0.0;  // leap, positive side
};

Thresholds closed_form_thresholds(const Experiment& exp);

// c*(D) for every D, for the experiment's metric.
TargetTable build_target_table(const Experiment& exp);

struct TrialOutcome {
    std::int64_t T = 0;
    Hypothesis decided;
    int n_errors = 0;
    int n_false_pos = 0;
    int n_false_neg = 0;
    std::optional<std::int64_t> sigma_A;  // consistency time within the trial
    std::int64_t samples_used = 0;
    StopKind kind = StopKind::None;
    int l = 0;
};

// Generator for trial `index` under a root seed.
std::mt19937_64 trial_rng(std::uint64_t root_seed, std::uint64_t index);

// An experiment with its target table built and sampler mode resolved.
// Immutable after construction, so trials can share it across threads.
class Simulator {
public:
    explicit Simulator(Experiment exp);

    const Experiment& experiment() const noexcept { return exp_; }
    const TargetTable& table() const noexcept { return table_; }
    SamplerMode mode() const noexcept { return mode_; }

    // Runs the sampling loop from the all-zero state. After each step the
    // callback sees the updated state and the sampled set; returning true ends
    // the walk. Returns false if the horizon was reached first.
    bool walk(std::mt19937_64& rng, std::int64_t horizon,
              const std::function<bool(const RunState&, const Hypothesis&)>& on_step) const;

private:
    Experiment exp_;
    TargetTable table_;
    SamplerMode mode_;
};

// One trial under the experiment's stopping rule. Throws TruncatedTrial at the horizon.
TrialOutcome run_trial(const Simulator& sim, const Thresholds& thr, std::mt19937_64& rng);
TrialOutcome run_trial(const Simulator& sim, const Thresholds& thr, std::uint64_t root_seed, std::uint64_t index);

struct McSummary {
    std::int64_t runs = 0;
    double mean_T = 0.0;
    double se_T = 0.0;  // NaN when runs == 1
    double mean_samples = 0.0;
    BinomialEstimate misclass;   // P(|A xor Delta| >= k)
    BinomialEstimate false_pos;  // P(|Delta \ A| >= k1)
    BinomialEstimate false_neg;  // P(|A \ Delta| >= k2)
    std::int64_t consistent = 0;  // trials whose estimate had settled on A by T
};

// Runs trials 0..runs-1 on `threads` workers (0 = hardware concurrency).
// Results depend only on the seed, not on the thread count.
McSummary monte_carlo(const Simulator& sim, const Thresholds& thr, std::int64_t runs, std::uint64_t root_seed,
                      int threads = 0);

// Calls fn(i) for i in [0, count) on a worker pool. The first exception
// (lowest index) is rethrown after all workers finish.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

enum class CalibrationMode {
    Joint,        // shift a and b together, keeping their closed-form offset
    Independent,  // alternate between a (false negatives) and b (false positives)
};

std::string to_string(CalibrationMode mode);
CalibrationMode parse_calibration_mode(const std::string& text);

struct CalibrationOptions {
    std::int64_t runs = 10'000;
    std::uint64_t seed = 1;
    int threads = 0;
    CalibrationMode mode = CalibrationMode::Independent;
    int max_rounds = 8;         // independent mode
    int max_widenings = 6;      // upper bracket doublings before giving up
    double bracket_scale = 1.25;  // initial upper bracket relative to the closed form
};

struct CalibrationResult {
    Thresholds thresholds;
    double rate = 0.0;   // misclass rate, or false-positive rate
    double rate2 = 0.0;  // false-negative rate (familywise)
    MeanEstimate T;
    int rounds = 0;
};

// Smallest thresholds whose empirical error rate(s) over `runs` trials do
// not exceed the targets. For the familywise metric the targets are alpha
// (false positives) and beta (false negatives); for misclassification only
// alpha is used.
CalibrationResult calibrate_threshold(const Simulator& sim, double alpha, double beta, const CalibrationOptions& opts);

}  // namespace anomid
