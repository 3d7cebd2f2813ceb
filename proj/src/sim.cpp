#include "anomid/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "anomid/allocation.hpp"
#include "anomid/error.hpp"

namespace anomid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Error bits carried by ladder segments.
constexpr std::uint8_t kMisclassBit = 1;
constexpr std::uint8_t kFalsePosBit = 2;
constexpr std::uint8_t kFalseNegBit = 4;

std::uint8_t error_flags(const Experiment& exp, const Hypothesis& decided) {
    std::uint8_t f = 0;
    if (count_symmetric_difference(exp.truth, decided) >= exp.k) f |= kMisclassBit;
    if (count_difference(decided, exp.truth) >= exp.k1) f |= kFalsePosBit;
    if (count_difference(exp.truth, decided) >= exp.k2) f |= kFalseNegBit;
    return f;
}

// A stopping condition seen as "stop at threshold t iff value >= t".
struct Rung {
    double value;
    std::uint8_t flags;
};

using RungFn = std::function<void(const RunState&, std::vector<Rung>&)>;

// Running-maximum records of a threshold-indexed stopping rule along one
// path. Stopping at threshold t happens at the first record >= t; the error
// flags of the decision taken there are kept as a step function of t.
struct Ladder {
    std::vector<double> rec_stat;
    std::vector<std::int64_t> rec_n;
    std::vector<double> seg_hi;
    std::vector<std::uint8_t> seg_flags;

    bool resolved(double t) const { return !rec_stat.empty() && rec_stat.back() >= t; }

    std::int64_t time_at(double t) const {
        const auto it = std::lower_bound(rec_stat.begin(), rec_stat.end(), t);
        return rec_n[static_cast<std::size_t>(it - rec_stat.begin())];
    }

    std::uint8_t flags_at(double t) const {
        const auto it = std::lower_bound(seg_hi.begin(), seg_hi.end(), t);
        return seg_flags[static_cast<std::size_t>(it - seg_hi.begin())];
    }
};

Ladder climb(const Simulator& sim, std::mt19937_64& rng, const RungFn& rungs, double upper) {
    Ladder lad;
    double running = -kInf;
    std::vector<Rung> buf;
    std::vector<double> breaks;
    sim.walk(rng, sim.experiment().horizon, [&](const RunState& st, const Hypothesis&) {
        buf.clear();
        rungs(st, buf);
        double top = -kInf;
        for (const Rung& r : buf) top = std::max(top, r.value);
        if (top <= running) return false;

        breaks.clear();
        for (const Rung& r : buf) {
            if (r.value > running) breaks.push_back(r.value);
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        for (double p : breaks) {
            std::uint8_t flags = 0;
            for (const Rung& r : buf) {
                if (r.value >= p) {
                    flags = r.flags;
                    break;
                }
            }
            if (!lad.seg_flags.empty() && lad.seg_flags.back() == flags) {
                lad.seg_hi.back() = p;
            } else {
                lad.seg_hi.push_back(p);
                lad.seg_flags.push_back(flags);
            }
        }
        lad.rec_stat.push_back(top);
        lad.rec_n.push_back(st.n);
        running = top;
        return top >= upper;
    });
    return lad;
}

struct Target {
    std::uint8_t bit;
    double rate;
};

class LadderSet {
public:
    LadderSet(const Simulator& sim, const CalibrationOptions& opts, RungFn rungs)
        : sim_(sim), opts_(opts), rungs_(std::move(rungs)), ladders_(static_cast<std::size_t>(opts.runs)) {}

    void climb_to(double upper) {
        parallel_for(opts_.runs, opts_.threads, [&](std::int64_t i) {
            auto rng = trial_rng(opts_.seed, static_cast<std::uint64_t>(i));
            ladders_[static_cast<std::size_t>(i)] = climb(sim_, rng, rungs_, upper);
        });
    }

    // Fraction of trials with `bit` set at threshold t; unresolved trials count as errors.
    double rate(double t, std::uint8_t bit) const {
        std::int64_t bad = 0;
        for (const Ladder& l : ladders_) {
            if (!l.resolved(t) || (l.flags_at(t) & bit)) ++bad;
        }
        return static_cast<double>(bad) / static_cast<double>(ladders_.size());
    }

    bool meets(double t, std::span<const Target> targets) const {
        return std::all_of(targets.begin(), targets.end(), [&](const Target& g) { return rate(t, g.bit) <= g.rate; });
    }

    MeanEstimate stopping_time(double t) const {
        std::vector<double> T;
        T.reserve(ladders_.size());
        for (const Ladder& l : ladders_) {
            if (!l.resolved(t)) throw CalibrationError("a trial did not reach the calibrated threshold");
            T.push_back(static_cast<double>(l.time_at(t)));
        }
        return mean_and_se(T);
    }

private:
    const Simulator& sim_;
    const CalibrationOptions& opts_;
    RungFn rungs_;
    std::vector<Ladder> ladders_;
};

// Smallest t in [lo, hi] meeting the targets, widening hi when needed.
double bisect_threshold(LadderSet& set, double lo, double hi, std::span<const Target> targets,
                        const CalibrationOptions& opts) {
    set.climb_to(hi);
    for (int w = 0; !set.meets(hi, targets); ++w) {
        if (w >= opts.max_widenings) {
            throw CalibrationError("error targets not met at the widest bracket end " + std::to_string(hi));
        }
        hi = lo + 2.0 * (hi - lo);
        set.climb_to(hi);
    }
    if (set.meets(lo, targets)) return lo;
    for (int iter = 0; iter < 200 && hi - lo > 1e-9 * std::max(1.0, std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (set.meets(mid, targets)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

std::string to_string(Metric metric) { return metric == Metric::Misclass ? "misclass" : "familywise"; }

Metric parse_metric(const std::string& text) {
    if (text == "misclass") return Metric::Misclass;
    if (text == "familywise") return Metric::Familywise;
    throw ConfigError("metric must be misclass or familywise; got '" + text + "'");
}

std::string to_string(CalibrationMode mode) { return mode == CalibrationMode::Joint ? "joint" : "independent"; }

CalibrationMode parse_calibration_mode(const std::string& text) {
    if (text == "joint") return CalibrationMode::Joint;
    if (text == "independent") return CalibrationMode::Independent;
    throw ConfigError("calibration must be joint or independent; got '" + text + "'");
}

double Experiment::ratio() const { return error_ratio(alpha, beta); }

void Experiment::validate() const {
    const int m = num_sources();
    if (m < 1 || m > kMaxSources) throw ConfigError("number of sources must be in [1, 64]");
    if (truth.num_sources() != m) throw ConfigError("true anomalous set does not match the number of sources");
    if (!std::isfinite(K) || K < 1.0 || K > m) throw ConfigError("budget K must be in [1, M]");
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) throw ConfigError("alpha, beta must lie in (0, 1)");
    if (metric == Metric::Misclass) {
        if (k < 1 || k > m) throw ConfigError("k must be in [1, M]");
    } else {
        if (k1 < 1 || k2 < 1 || k1 + k2 > m) throw ConfigError("need k1, k2 >= 1 and k1 + k2 <= M");
        if (alpha + beta >= 1.0) throw ConfigError("need alpha + beta < 1");
    }
    if (horizon < 1) throw ConfigError("horizon must be positive");
    SamplerConfig s = sampler;
    s.K = K;
    s.validate(m);
}

Thresholds closed_form_thresholds(const Experiment& exp) {
    Thresholds t;
    const int m = exp.num_sources();
    if (exp.metric == Metric::Misclass) {
        t.d = threshold_misclass(exp.alpha, m, exp.k);
    } else {
        const LeapThresholds ab = thresholds_familywise(exp.alpha, exp.beta, m, exp.k1, exp.k2);
        t.a = ab.a;
        t.b = ab.b;
    }
    return t;
}

TargetTable build_target_table(const Experiment& exp) {
    const std::vector<SourceModel> models = exp.models;
    if (exp.metric == Metric::Misclass) {
        return TargetTable(exp.num_sources(), [models, k = exp.k, K = exp.K](const Hypothesis& D) {
            return c_star_misclass(models, D, k, K);
        });
    }
    return TargetTable(exp.num_sources(), [models, k1 = exp.k1, k2 = exp.k2, K = exp.K, r = exp.ratio()](
                                              const Hypothesis& D) { return c_star_familywise(models, D, k1, k2, K, r); });
}

std::mt19937_64 trial_rng(std::uint64_t root_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

namespace {

Experiment prepared(Experiment exp) {
    exp.validate();
    exp.sampler.K = exp.K;
    return exp;
}

}  // namespace

Simulator::Simulator(Experiment exp)
    : exp_(prepared(std::move(exp))), table_(build_target_table(exp_)), mode_(resolve_mode(exp_.sampler, table_)) {
    if (mode_ == SamplerMode::Forced) {
        if (exp_.sampler.cp_auto && table_.precomputed()) {
            exp_.sampler.cp = std::min(exp_.sampler.cp, 0.999 * table_.max_forced_scale());
        }
        check_forced_feasible(exp_.sampler, table_);
    }
}

bool Simulator::walk(std::mt19937_64& rng, std::int64_t horizon,
                     const std::function<bool(const RunState&, const Hypothesis&)>& on_step) const {
    const int m = exp_.num_sources();
    const int floor_K = exp_.sampler.floor_K();
    RunState st = RunState::initial(m);
    std::vector<double> obs;
    obs.reserve(static_cast<std::size_t>(m));
    for (std::int64_t n = 1; n <= horizon; ++n) {
        std::vector<double> probs = sampling_probs(n, st.estimate, table_, exp_.sampler, mode_);
        if (exp_.sampler.top_up) top_up(probs, floor_K);
        const Hypothesis sampled = draw_subset(probs, floor_K, rng);
        obs.clear();
        for (int i = 0; i < m; ++i) {
            if (sampled.contains(i)) obs.push_back(exp_.models[i].sample(exp_.truth.contains(i), rng));
        }
        update_llrs(st, exp_.models, sampled, obs);
        if (on_step(st, sampled)) return true;
    }
    return false;
}

TrialOutcome run_trial(const Simulator& sim, const Thresholds& thr, std::mt19937_64& rng) {
    const Experiment& exp = sim.experiment();
    TrialOutcome out;
    StopDecision decision;
    std::int64_t last_mismatch = 0;
    const bool stopped = sim.walk(rng, exp.horizon, [&](const RunState& st, const Hypothesis& sampled) {
        out.samples_used += sampled.size();
        if (!(st.estimate == exp.truth)) last_mismatch = st.n;
        decision = exp.metric == Metric::Misclass ? check_sum_intersection(st, exp.k, thr.d)
                                                  : check_leap(st, exp.k1, exp.k2, thr.a, thr.b);
        out.T = st.n;
        return decision.stopped;
    });
    if (!stopped) {
        throw TruncatedTrial("trial reached the horizon of " + std::to_string(exp.horizon) + " steps without stopping");
    }
    out.decided = decision.decided;
    out.kind = decision.kind;
    out.l = decision.l;
    out.n_false_pos = count_difference(out.decided, exp.truth);
    out.n_false_neg = count_difference(exp.truth, out.decided);
    out.n_errors = out.n_false_pos + out.n_false_neg;
    if (last_mismatch < out.T) out.sigma_A = last_mismatch + 1;
    return out;
}

TrialOutcome run_trial(const Simulator& sim, const Thresholds& thr, std::uint64_t root_seed, std::uint64_t index) {
    auto rng = trial_rng(root_seed, index);
    return run_trial(sim, thr, rng);
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
    if (count <= 0) return;
    const int workers = static_cast<int>(
        std::min<std::int64_t>(count, threads > 0 ? threads : std::max(1U, std::thread::hardware_concurrency())));
    std::atomic<std::int64_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::int64_t> error_index(static_cast<std::size_t>(workers), count);
    auto work = [&](int w) {
        for (std::int64_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                if (i < error_index[w]) {
                    error_index[w] = i;
                    errors[w] = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    const auto first = std::min_element(error_index.begin(), error_index.end());
    if (*first < count) std::rethrow_exception(errors[static_cast<std::size_t>(first - error_index.begin())]);
}

McSummary monte_carlo(const Simulator& sim, const Thresholds& thr, std::int64_t runs, std::uint64_t root_seed,
                      int threads) {
    if (runs < 1) throw InvalidArgument("runs must be at least 1");
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(runs));
    std::vector<char> truncated(static_cast<std::size_t>(runs), 0);
    parallel_for(runs, threads, [&](std::int64_t i) {
        try {
            outcomes[static_cast<std::size_t>(i)] = run_trial(sim, thr, root_seed, static_cast<std::uint64_t>(i));
        } catch (const TruncatedTrial&) {
            truncated[static_cast<std::size_t>(i)] = 1;
        }
    });
    const auto n_truncated = std::count(truncated.begin(), truncated.end(), 1);
    if (n_truncated > 0) {
        throw TruncatedTrial(std::to_string(n_truncated) + " of " + std::to_string(runs) +
                             " trials reached the horizon without stopping");
    }

    const Experiment& exp = sim.experiment();
    McSummary s;
    s.runs = runs;
    std::vector<double> T;
    T.reserve(outcomes.size());
    std::int64_t mis = 0, fp = 0, fn = 0, samples = 0;
    for (const TrialOutcome& o : outcomes) {
        T.push_back(static_cast<double>(o.T));
        samples += o.samples_used;
        if (o.n_errors >= exp.k) ++mis;
        if (o.n_false_pos >= exp.k1) ++fp;
        if (o.n_false_neg >= exp.k2) ++fn;
        if (o.sigma_A) ++s.consistent;
    }
    const MeanEstimate m = mean_and_se(T);
    s.mean_T = m.mean;
    s.se_T = m.se;
    s.mean_samples = static_cast<double>(samples) / static_cast<double>(runs);
    s.misclass = clopper_pearson(mis, runs);
    s.false_pos = clopper_pearson(fp, runs);
    s.false_neg = clopper_pearson(fn, runs);
    return s;
}

CalibrationResult calibrate_threshold(const Simulator& sim, double alpha, double beta, const CalibrationOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw InvalidArgument("calibration targets must lie in (0, 1)");
    }
    if (opts.runs < 1) throw InvalidArgument("runs must be at least 1");
    if (!(opts.bracket_scale > 1.0)) throw InvalidArgument("bracket_scale must exceed 1");
    const Experiment& exp = sim.experiment();
    const Thresholds closed = closed_form_thresholds(exp);
    CalibrationResult res;

    if (exp.metric == Metric::Misclass) {
        LadderSet set(sim, opts, [&](const RunState& st, std::vector<Rung>& out) {
            const double stat = sum_intersection_statistic(st.llr, exp.k);
            out.push_back({stat, error_flags(exp, check_sum_intersection(st, exp.k, stat).decided)});
        });
        const Target targets[] = {{kMisclassBit, alpha}};
        const double d = bisect_threshold(set, 0.0, opts.bracket_scale * closed.d, targets, opts);
        res.thresholds.d = d;
        res.rate = set.rate(d, kMisclassBit);
        res.T = set.stopping_time(d);
        res.rounds = 1;
        return res;
    }

    const Target fp_target{kFalsePosBit, alpha};
    const Target fn_target{kFalseNegBit, beta};

    if (opts.mode == CalibrationMode::Joint) {
        const double a0 = closed.a;
        const double b0 = closed.b;
        LadderSet set(sim, opts, [&](const RunState& st, std::vector<Rung>& out) {
            for (const LeapCondition& c : leap_conditions(st.llr, exp.k1, exp.k2)) {
                out.push_back({std::min(c.b_sum - b0, c.a_sum - a0), error_flags(exp, c.decided)});
            }
        });
        const Target targets[] = {fp_target, fn_target};
        const double s = bisect_threshold(set, -std::min(a0, b0), (opts.bracket_scale - 1.0) * std::max(a0, b0),
                                          targets, opts);
        res.thresholds.a = a0 + s;
        res.thresholds.b = b0 + s;
        res.rate = set.rate(s, kFalsePosBit);
        res.rate2 = set.rate(s, kFalseNegBit);
        res.T = set.stopping_time(s);
        res.rounds = 1;
        return res;
    }

    double a = closed.a;
    double b = closed.b;
    for (int round = 1; round <= opts.max_rounds; ++round) {
        res.rounds = round;
        const double a_prev = a;
        const double b_prev = b;

        // b fixed, a varies: stop at a iff some condition has b_sum >= b and a_sum >= a.
        LadderSet a_set(sim, opts, [&](const RunState& st, std::vector<Rung>& out) {
            for (const LeapCondition& c : leap_conditions(st.llr, exp.k1, exp.k2)) {
                out.push_back({c.b_sum >= b ? c.a_sum : -kInf, error_flags(exp, c.decided)});
            }
        });
        const Target a_targets[] = {fn_target};
        a = bisect_threshold(a_set, 0.0, opts.bracket_scale * std::max(a, closed.a), a_targets, opts);

        LadderSet b_set(sim, opts, [&](const RunState& st, std::vector<Rung>& out) {
            for (const LeapCondition& c : leap_conditions(st.llr, exp.k1, exp.k2)) {
                out.push_back({c.a_sum >= a ? c.b_sum : -kInf, error_flags(exp, c.decided)});
            }
        });
        const Target b_targets[] = {fp_target};
        b = bisect_threshold(b_set, 0.0, opts.bracket_scale * std::max(b, closed.b), b_targets, opts);

        res.thresholds.a = a;
        res.thresholds.b = b;
        res.rate = b_set.rate(b, kFalsePosBit);
        res.rate2 = b_set.rate(b, kFalseNegBit);
        res.T = b_set.stopping_time(b);
        const double tol = 1e-6;
        if (std::abs(a - a_prev) <= tol * std::max(1.0, a) && std::abs(b - b_prev) <= tol * std::max(1.0, b) &&
            res.rate2 <= beta) {
            break;
        }
    }
    return res;
}

}  // namespace anomid
