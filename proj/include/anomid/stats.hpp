#pragma once

#include <cstdint>
#include <span>

namespace anomid {

// Proportion with an exact (Clopper-Pearson) two-sided confidence interval.
struct BinomialEstimate {
    std::int64_t successes = 0;
    std::int64_t trials = 0;
    double rate = 0.0;
    double lower = 0.0;
    double upper = 1.0;
};

BinomialEstimate clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence = 0.95);

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;  // sample sd / sqrt(n); NaN for a single observation
    std::int64_t n = 0;
};

MeanEstimate mean_and_se(std::span<const double> values);

// Standard error of num/den for independent estimates (first-order delta method).
double ratio_se(const MeanEstimate& num, const MeanEstimate& den);

}  // namespace anomid
