#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "anomid/allocation.hpp"
#include "anomid/model.hpp"

namespace anomid {

enum class SamplerMode {
    Auto,    // Plain if every target is strictly positive, otherwise Forced
    Plain,   // sample source i with probability c*_i(D)
    Forced,  // floor b_n = C_p * n^-delta on zero targets, paid for by the others
};

std::string to_string(SamplerMode mode);
SamplerMode parse_sampler_mode(const std::string& text);

struct SamplerConfig {
    double K = 1.0;
    double delta = 0.2;
    double cp = 0.01;
    bool cp_auto = false;  // lower cp to the largest value the targets admit, if needed
    SamplerMode mode = SamplerMode::Auto;
    bool top_up = true;  // fill up to floor(K) sources per instant

    int floor_K() const;
    void validate(int num_sources) const;
};

// Target frequencies c*(D) for every candidate estimate D. Up to
// `precompute_limit` sources the whole table is built up front; larger
// problems compute entries on first use and cache them.
class TargetTable {
public:
    using Builder = std::function<AllocationVector(const Hypothesis&)>;

    TargetTable(int num_sources, Builder builder, int precompute_limit = 12);
    ~TargetTable();
    TargetTable(TargetTable&&) noexcept;
    TargetTable& operator=(TargetTable&&) noexcept;

    int num_sources() const noexcept { return m_; }
    bool precomputed() const noexcept { return !dense_.empty(); }

    // Safe to call from several threads.
    const std::vector<double>& at(const Hypothesis& D) const;

    // True when every entry of every precomputed target is strictly positive;
    // false when the table is computed on demand.
    bool all_positive() const noexcept { return all_positive_; }

    // Smallest positive entry scaled by (M - zeros) / M over the precomputed
    // table; the largest C_p the forced rule admits at n = 1.
    double max_forced_scale() const noexcept { return max_cp_; }

private:
    struct Cache;

    int m_;
    Builder builder_;
    std::vector<std::vector<double>> dense_;
    std::unique_ptr<Cache> cache_;
    bool all_positive_ = false;
    double max_cp_ = 0.0;
};

// The mode actually used once Auto is resolved against the table.
SamplerMode resolve_mode(const SamplerConfig& cfg, const TargetTable& table);

// Throws ConfigError when forced exploration would leave [0, 1] or undercut
// the floor C_p * n^-delta for some precomputed target.
void check_forced_feasible(const SamplerConfig& cfg, const TargetTable& table);

// Per-source sampling probabilities at time n >= 1 given the estimate D.
// `mode` must be Plain or Forced.
std::vector<double> sampling_probs(std::int64_t n, const Hypothesis& D, const TargetTable& table,
                                   const SamplerConfig& cfg, SamplerMode mode);
std::vector<double> sampling_probs(std::int64_t n, std::span<const double> target, const SamplerConfig& cfg,
                                   SamplerMode mode);

// Raises probabilities in proportion to their slack 1 - p_i so they sum to
// floor_K. No-op when they already do; ConstraintViolation when they exceed it.
void top_up(std::vector<double>& probs, int floor_K);

// Systematic sampling with a uniform random start over sources in id order.
// Inclusion probabilities equal probs exactly; the size is floor or ceil of
// sum(probs). ConstraintViolation when sum(probs) > floor_K.
Hypothesis draw_subset(std::span<const double> probs, int floor_K, std::mt19937_64& rng);

// First time n (1-based, trace[0] is D_1) from which every estimate in the
// trace equals A; nullopt when the last estimate differs from A.
std::optional<std::int64_t> consistency_time(std::span<const Hypothesis> trace, const Hypothesis& A);

}  // namespace anomid
