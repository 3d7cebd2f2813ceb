#include "anomid/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "anomid/error.hpp"

namespace anomid {

namespace {

// Slack allowed on sums of probabilities before a budget breach is reported.
constexpr double kSumTol = 1e-9;

double exploration_floor(std::int64_t n, const SamplerConfig& cfg) {
    return cfg.cp * std::pow(static_cast<double>(n), -cfg.delta);
}

}  // namespace

std::string to_string(SamplerMode mode) {
    switch (mode) {
        case SamplerMode::Auto: return "auto";
        case SamplerMode::Plain: return "plain";
        case SamplerMode::Forced: return "forced";
    }
    return "unknown";
}

SamplerMode parse_sampler_mode(const std::string& text) {
    if (text == "auto") return SamplerMode::Auto;
    if (text == "plain") return SamplerMode::Plain;
    if (text == "forced") return SamplerMode::Forced;
    throw ConfigError("sampler must be one of auto, plain, forced; got '" + text + "'");
}

int SamplerConfig::floor_K() const { return static_cast<int>(std::floor(K)); }

void SamplerConfig::validate(int num_sources) const {
    if (!std::isfinite(K) || K < 1.0 || K > num_sources) {
        throw ConfigError("budget K must be in [1, M] = [1, " + std::to_string(num_sources) + "]");
    }
    if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 0.5)");
    if (!std::isfinite(cp) || !(cp > 0.0)) throw ConfigError("cp must be positive");
}

struct TargetTable::Cache {
    std::mutex mu;
    std::unordered_map<std::uint64_t, std::unique_ptr<std::vector<double>>> entries;
};

TargetTable::TargetTable(int num_sources, Builder builder, int precompute_limit)
    : m_(num_sources), builder_(std::move(builder)), cache_(std::make_unique<Cache>()) {
    if (num_sources < 1 || num_sources > kMaxSources) throw InvalidArgument("number of sources out of range");
    if (num_sources > precompute_limit) return;

    const std::uint64_t count = std::uint64_t{1} << num_sources;
    dense_.resize(count);
    all_positive_ = true;
    max_cp_ = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        dense_[mask] = builder_(Hypothesis(num_sources, mask)).c;
        const auto& c = dense_[mask];
        const auto zeros = std::count(c.begin(), c.end(), 0.0);
        if (zeros > 0) all_positive_ = false;
        if (zeros == num_sources) continue;
        double smallest = std::numeric_limits<double>::infinity();
        for (double ci : c) {
            if (ci > 0.0) smallest = std::min(smallest, ci);
        }
        max_cp_ = std::min(max_cp_, smallest * static_cast<double>(num_sources - zeros) / num_sources);
    }
}

TargetTable::~TargetTable() = default;
TargetTable::TargetTable(TargetTable&&) noexcept = default;
TargetTable& TargetTable::operator=(TargetTable&&) noexcept = default;

const std::vector<double>& TargetTable::at(const Hypothesis& D) const {
    if (D.num_sources() != m_) throw InvalidArgument("estimate size does not match the target table");
    if (!dense_.empty()) return dense_[D.mask()];
    std::lock_guard lock(cache_->mu);
    auto it = cache_->entries.find(D.mask());
    if (it == cache_->entries.end()) {
        it = cache_->entries.emplace(D.mask(), std::make_unique<std::vector<double>>(builder_(D).c)).first;
    }
    return *it->second;
}

SamplerMode resolve_mode(const SamplerConfig& cfg, const TargetTable& table) {
    if (cfg.mode != SamplerMode::Auto) return cfg.mode;
    return table.all_positive() ? SamplerMode::Plain : SamplerMode::Forced;
}

void check_forced_feasible(const SamplerConfig& cfg, const TargetTable& table) {
    if (!table.precomputed()) return;  // entries are checked as they are used
    if (cfg.cp > table.max_forced_scale()) {
        throw ConfigError("cp = " + std::to_string(cfg.cp) + " is too large for forced exploration; it must not exceed " +
                          std::to_string(table.max_forced_scale()));
    }
}

std::vector<double> sampling_probs(std::int64_t n, std::span<const double> target, const SamplerConfig& cfg,
                                   SamplerMode mode) {
    if (n < 1) throw InvalidArgument("sampling time starts at n = 1");
    std::vector<double> probs(target.begin(), target.end());
    if (mode == SamplerMode::Plain) return probs;
    if (mode != SamplerMode::Forced) throw InvalidArgument("sampler mode must be resolved before use");

    const int m = static_cast<int>(target.size());
    const auto zeros = static_cast<int>(std::count(target.begin(), target.end(), 0.0));
    if (zeros == 0 || zeros == m) {
        if (zeros == m) std::fill(probs.begin(), probs.end(), exploration_floor(n, cfg));
        return probs;
    }
    const double b = exploration_floor(n, cfg);
    const double shift = static_cast<double>(zeros) / (m - zeros) * b;
    for (double& p : probs) {
        p = p == 0.0 ? b : p - shift;
        if (p < b * (1.0 - 1e-12) || p > 1.0) {
            throw ConfigError("forced exploration pushed a probability to " + std::to_string(p) +
                              ", below the floor " + std::to_string(b) + "; lower cp");
        }
    }
    return probs;
}

std::vector<double> sampling_probs(std::int64_t n, const Hypothesis& D, const TargetTable& table,
                                   const SamplerConfig& cfg, SamplerMode mode) {
    return sampling_probs(n, table.at(D), cfg, mode);
}

void top_up(std::vector<double>& probs, int floor_K) {
    const int m = static_cast<int>(probs.size());
    const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (s > floor_K + kSumTol) {
        throw ConstraintViolation("sampling probabilities sum to " + std::to_string(s) + " > floor(K) = " +
                                  std::to_string(floor_K));
    }
    if (s >= floor_K) return;
    const double t = (floor_K - s) / (m - s);
    for (double& p : probs) p = std::min(1.0, p + (1.0 - p) * t);
}

Hypothesis draw_subset(std::span<const double> probs, int floor_K, std::mt19937_64& rng) {
    const int m = static_cast<int>(probs.size());
    if (m > kMaxSources) throw InvalidArgument("too many sources");
    long double total = 0.0L;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConstraintViolation("sampling probability outside [0, 1]");
        total += p;
    }
    if (total > floor_K + kSumTol) {
        throw ConstraintViolation("sampling probabilities sum to " + std::to_string(static_cast<double>(total)) +
                                  " > floor(K) = " + std::to_string(floor_K));
    }

    const long double start = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::uint64_t mask = 0;
    int taken = 0;
    long double cum = 0.0L;
    for (int i = 0; i < m; ++i) {
        const long double next = cum + probs[i];
        // Grid points start + j falling in [cum, next).
        const long double hits = std::ceil(next - start) - std::ceil(cum - start);
        if (hits >= 1.0L && taken < floor_K) {
            mask |= std::uint64_t{1} << i;
            ++taken;
        }
        cum = next;
    }
    return Hypothesis(m, mask);
}

std::optional<std::int64_t> consistency_time(std::span<const Hypothesis> trace, const Hypothesis& A) {
    if (trace.empty() || !(trace.back() == A)) return std::nullopt;
    std::int64_t first = 1;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!(trace[i] == A)) first = static_cast<std::int64_t>(i) + 2;
    }
    return first;
}

}  // namespace anomid
