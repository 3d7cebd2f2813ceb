#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace anomid {

// Maximum number of sources a Hypothesis bitmask can address.
inline constexpr int kMaxSources = 64;

enum class Family {
    GaussianUnitVariance,  // f0 = N(0,1), f1 = N(mu,1)
};

struct KlPair {
    double I = 0.0;  // KL(f1 || f0)
    double J = 0.0;  // KL(f0 || f1)
};

// One data source: the pair of densities (f0, f1) it may follow.
class SourceModel {
public:
    SourceModel(int id, Family kind, double mu);

    static SourceModel gaussian(int id, double mu) { return {id, Family::GaussianUnitVariance, mu}; }

    int id() const noexcept { return id_; }
    Family kind() const noexcept { return kind_; }
    double mu() const noexcept { return mu_; }

    KlPair kl() const noexcept { return kl_; }

    // log(f1(x) / f0(x)), in nats.
    double llr(double x) const noexcept;

    // One observation from f1 if anomalous, otherwise from f0.
    double sample(bool anomalous, std::mt19937_64& rng) const;

private:
    int id_;
    Family kind_;
    double mu_;
    KlPair kl_;
};

// (I, J) for a model; throws InvalidModel on non-positive or non-finite mu.
KlPair kl_numbers(const SourceModel& model);

// Gaussian sources 0..mus.size()-1.
std::vector<SourceModel> gaussian_sources(std::span<const double> mus);

// The subset of anomalous sources, stored as a bitmask over [0, M).
class Hypothesis {
public:
    Hypothesis() = default;
    Hypothesis(int num_sources, std::uint64_t mask);

    static Hypothesis empty(int num_sources) { return {num_sources, 0}; }
    static Hypothesis full(int num_sources);
    static Hypothesis of(int num_sources, std::initializer_list<int> members);
    static Hypothesis of(int num_sources, std::span<const int> members);

    int num_sources() const noexcept { return m_; }
    std::uint64_t mask() const noexcept { return mask_; }
    bool contains(int i) const noexcept { return (mask_ >> i) & 1U; }
    int size() const noexcept;
    bool is_empty() const noexcept { return mask_ == 0; }
    bool is_full() const noexcept { return size() == m_; }

    Hypothesis complement() const noexcept;
    void insert(int i) noexcept { mask_ |= std::uint64_t{1} << i; }
    void erase(int i) noexcept { mask_ &= ~(std::uint64_t{1} << i); }

    std::vector<int> members() const;

    // "{1,2,5}" with 1-based ids, the convention used in CSV and on the CLI.
    std::string to_string() const;

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

private:
    int m_ = 0;
    std::uint64_t mask_ = 0;
};

// |a \ b|, |b \ a| and |a xor b|.
int count_difference(const Hypothesis& a, const Hypothesis& b) noexcept;
int count_symmetric_difference(const Hypothesis& a, const Hypothesis& b) noexcept;

// An ascending list of positive KL numbers that remembers which source each
// position came from. Position p (0-based) holds the (p+1)-th smallest value.
class OrderedKlSet {
public:
    OrderedKlSet() = default;

    // Sorts by (value, source) so equal values are ordered by source id.
    explicit OrderedKlSet(std::vector<std::pair<double, int>> entries);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t pos) const { return values_[pos]; }
    int source_of(std::size_t pos) const { return sources_[pos]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const int> sources() const noexcept { return sources_; }

    // Copy without the `drop` smallest entries.
    OrderedKlSet tail(std::size_t drop) const;

private:
    std::vector<double> values_;
    std::vector<int> sources_;
};

// {I_i : i in A} together with {J_j : j not in A}.
OrderedKlSet build_f_set(std::span<const SourceModel> models, const Hypothesis& A);

// {I_i : i in A}; throws InvalidArgument when A is empty.
OrderedKlSet build_i_set(std::span<const SourceModel> models, const Hypothesis& A);

// {J_j : j not in A}; throws InvalidArgument when A is the full set.
OrderedKlSet build_j_set(std::span<const SourceModel> models, const Hypothesis& A);

struct IjSets {
    OrderedKlSet I;  // empty when A is empty
    OrderedKlSet J;  // empty when A is full
};

IjSets build_ij_sets(std::span<const SourceModel> models, const Hypothesis& A);

}  // namespace anomid
