#include "anomid/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "anomid/error.hpp"

namespace anomid {

namespace {

void check_source_count(int m) {
    if (m < 0 || m > kMaxSources) {
        throw InvalidArgument("number of sources must be in [0, 64], got " + std::to_string(m));
    }
}

std::uint64_t full_mask(int m) {
    return m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
}

}  // namespace

SourceModel::SourceModel(int id, Family kind, double mu) : id_(id), kind_(kind), mu_(mu) {
    switch (kind_) {
        case Family::GaussianUnitVariance:
            if (!std::isfinite(mu_) || !(mu_ > 0.0)) {
                throw InvalidModel("source " + std::to_string(id_) +
                                   ": gaussian anomalous mean must be finite and > 0");
            }
            kl_ = {0.5 * mu_ * mu_, 0.5 * mu_ * mu_};
            break;
    }
    if (!(kl_.I > 0.0) || !(kl_.J > 0.0) || !std::isfinite(kl_.I) || !std::isfinite(kl_.J)) {
        throw InvalidModel("source " + std::to_string(id_) + ": KL numbers must be positive and finite");
    }
}

double SourceModel::llr(double x) const noexcept {
    // log N(x; mu, 1) - log N(x; 0, 1)
    return mu_ * x - 0.5 * mu_ * mu_;
}

double SourceModel::sample(bool anomalous, std::mt19937_64& rng) const {
    std::normal_distribution<double> noise(0.0, 1.0);
    return noise(rng) + (anomalous ? mu_ : 0.0);
}

KlPair kl_numbers(const SourceModel& model) { return model.kl(); }

std::vector<SourceModel> gaussian_sources(std::span<const double> mus) {
    std::vector<SourceModel> out;
    out.reserve(mus.size());
    for (std::size_t i = 0; i < mus.size(); ++i) {
        out.push_back(SourceModel::gaussian(static_cast<int>(i), mus[i]));
    }
    return out;
}

Hypothesis::Hypothesis(int num_sources, std::uint64_t mask) : m_(num_sources), mask_(mask) {
    check_source_count(num_sources);
    if ((mask & ~full_mask(num_sources)) != 0) {
        throw InvalidArgument("hypothesis mask has bits outside [0, M)");
    }
}

Hypothesis Hypothesis::full(int num_sources) {
    check_source_count(num_sources);
    return {num_sources, full_mask(num_sources)};
}

Hypothesis Hypothesis::of(int num_sources, std::initializer_list<int> members) {
    return of(num_sources, std::span<const int>(members.begin(), members.size()));
}

Hypothesis Hypothesis::of(int num_sources, std::span<const int> members) {
    Hypothesis h = empty(num_sources);
    for (int i : members) {
        if (i < 0 || i >= num_sources) {
            throw InvalidArgument("source id " + std::to_string(i) + " outside [0, M)");
        }
        h.insert(i);
    }
    return h;
}

int Hypothesis::size() const noexcept { return std::popcount(mask_); }

Hypothesis Hypothesis::complement() const noexcept {
    Hypothesis h = *this;
    h.mask_ = ~mask_ & full_mask(m_);
    return h;
}

std::vector<int> Hypothesis::members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (int i = 0; i < m_; ++i) {
        if (contains(i)) out.push_back(i);
    }
    return out;
}

std::string Hypothesis::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (int i : members()) {
        if (!first) os << ',';
        os << i + 1;
        first = false;
    }
    os << '}';
    return os.str();
}

int count_difference(const Hypothesis& a, const Hypothesis& b) noexcept {
    return std::popcount(a.mask() & ~b.mask());
}

int count_symmetric_difference(const Hypothesis& a, const Hypothesis& b) noexcept {
    return std::popcount(a.mask() ^ b.mask());
}

OrderedKlSet::OrderedKlSet(std::vector<std::pair<double, int>> entries) {
    std::sort(entries.begin(), entries.end());
    values_.reserve(entries.size());
    sources_.reserve(entries.size());
    for (const auto& [value, source] : entries) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw InvalidArgument("ordered KL set entries must be positive and finite");
        }
        values_.push_back(value);
        sources_.push_back(source);
    }
}

OrderedKlSet OrderedKlSet::tail(std::size_t drop) const {
    if (drop > size()) {
        throw InvalidArgument("cannot drop " + std::to_string(drop) + " entries from a set of size " +
                              std::to_string(size()));
    }
    OrderedKlSet out;
    out.values_.assign(values_.begin() + static_cast<std::ptrdiff_t>(drop), values_.end());
    out.sources_.assign(sources_.begin() + static_cast<std::ptrdiff_t>(drop), sources_.end());
    return out;
}

OrderedKlSet build_f_set(std::span<const SourceModel> models, const Hypothesis& A) {
    if (static_cast<int>(models.size()) != A.num_sources()) {
        throw InvalidArgument("hypothesis size does not match the number of sources");
    }
    std::vector<std::pair<double, int>> entries;
    entries.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        const KlPair kl = models[i].kl();
        entries.emplace_back(A.contains(static_cast<int>(i)) ? kl.I : kl.J, static_cast<int>(i));
    }
    return OrderedKlSet(std::move(entries));
}

IjSets build_ij_sets(std::span<const SourceModel> models, const Hypothesis& A) {
    if (static_cast<int>(models.size()) != A.num_sources()) {
        throw InvalidArgument("hypothesis size does not match the number of sources");
    }
    std::vector<std::pair<double, int>> in_a;
    std::vector<std::pair<double, int>> out_a;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const KlPair kl = models[i].kl();
        if (A.contains(static_cast<int>(i))) {
            in_a.emplace_back(kl.I, static_cast<int>(i));
        } else {
            out_a.emplace_back(kl.J, static_cast<int>(i));
        }
    }
    return {OrderedKlSet(std::move(in_a)), OrderedKlSet(std::move(out_a))};
}

OrderedKlSet build_i_set(std::span<const SourceModel> models, const Hypothesis& A) {
    if (A.is_empty()) throw InvalidArgument("I(A) is undefined for the empty hypothesis");
    return build_ij_sets(models, A).I;
}

OrderedKlSet build_j_set(std::span<const SourceModel> models, const Hypothesis& A) {
    if (A.is_full()) throw InvalidArgument("J(A) is undefined for the full hypothesis");
    return build_ij_sets(models, A).J;
}

}  // namespace anomid
