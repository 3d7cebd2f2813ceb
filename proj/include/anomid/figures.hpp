#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anomid/config.hpp"

namespace anomid {

enum class Figure {
    Fig1,    // misclassification, calibrated thresholds: E[T; k] / E[T; 1] against k
    Fig2,    // familywise, calibrated thresholds: E[T; k1 = k2] / E[T; 1] against k1
    Fig3,    // misclassification, closed-form thresholds: E[T; 5] / E[T; 1] against |log10 alpha|
    Fig4,    // familywise, closed-form thresholds: E[T; 3, 3] / E[T; 1, 1] against |log10 alpha|
    Table1,  // (l_A, x1, x2, y1, y2) for k1 = k2 in 1..5
    Eq76,    // V(k, K, F(A)) from the solver and from its closed form, k in 1..M
    Eq80,    // familywise difficulty and both sides of its budget balance
};

Figure parse_figure(const std::string& text);
std::string to_string(Figure f);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

// Shortest round-trip text for a double; "nan" / "inf" for the specials.
std::string format_number(double v);

// Uses the reference setup from `base` (sources, truth, K, sampler, runs,
// seed, threads); the metric and tolerances are set per figure.
CsvTable reproduce_figure(Figure which, const RunConfig& base);

// Closed-form V(k, 5, F(A)) for the reference setup, k in [1, 10].
double reference_v_formula(int k);

}  // namespace anomid
