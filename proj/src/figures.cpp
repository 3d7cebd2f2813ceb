#include "anomid/figures.hpp"

#include <cmath>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "anomid/allocation.hpp"
#include "anomid/error.hpp"
#include "anomid/maxmin.hpp"

namespace anomid {

namespace {

const std::string kDash = "-";

struct Branch {
    std::string x = kDash;
    std::string y = kDash;
};

Branch describe(const SolutionV& s, int kappa) {
    Branch b;
    if (s.has_x()) b.x = format_number(s.x);
    if (s.has_y(kappa)) b.y = format_number(s.y);
    return b;
}

bool is_i_side(DifficultyCase c) { return c == DifficultyCase::FwV3 || c == DifficultyCase::FwFull; }

// Stopping-time ratio E[T; num] / E[T; den] with closed-form thresholds.
std::vector<std::string> closed_form_ratio_row(const Experiment& num, const Experiment& den, const RunConfig& base,
                                              double x, double asymptote) {
    const Simulator s_num(num);
    const Simulator s_den(den);
    const McSummary a = monte_carlo(s_num, closed_form_thresholds(num), base.runs, base.seed, base.threads);
    const McSummary b = monte_carlo(s_den, closed_form_thresholds(den), base.runs, base.seed, base.threads);
    const MeanEstimate ma{a.mean_T, a.se_T, a.runs};
    const MeanEstimate mb{b.mean_T, b.se_T, b.runs};
    return {format_number(x), format_number(a.mean_T / b.mean_T), format_number(ratio_se(ma, mb)),
            format_number(asymptote)};
}

CsvTable table1(const RunConfig& base) {
    const Experiment exp = base.experiment();
    CsvTable t;
    t.header = {"k1_eq_k2", "l_A", "x1", "x2", "y1", "y2", "case", "value"};
    for (int k = 1; k <= exp.num_sources() / 2; ++k) {
        const DifficultyReport rep = difficulty_familywise(exp.models, exp.truth, k, k, exp.K, 1.0);
        Branch b1, b2;
        if (rep.w_solution) {
            b1 = describe(rep.w_solution->branch1, rep.kappa1);
            b2 = describe(rep.w_solution->branch2, rep.kappa2);
        } else if (is_i_side(rep.kind)) {
            b1 = describe(*rep.v_solution, rep.kappa1);
        } else {
            b2 = describe(*rep.v_solution, rep.kappa1);
        }
        t.rows.push_back({std::to_string(k), std::to_string(rep.l_A), b1.x, b2.x, b1.y, b2.y, to_string(rep.kind),
                          format_number(rep.value)});
    }
    return t;
}

CsvTable eq80(const RunConfig& base) {
    const Experiment exp = base.experiment();
    CsvTable t;
    t.header = {"k1_eq_k2", "value", "case", "l_A", "positive_side", "negative_side"};
    for (int k = 1; k <= exp.num_sources() / 2; ++k) {
        const DifficultyReport rep = difficulty_familywise(exp.models, exp.truth, k, k, exp.K, 1.0);
        std::string lhs = kDash;
        std::string rhs = kDash;
        if (rep.w_solution) {
            lhs = format_number(rep.w_solution->value);
            rhs = format_number(rep.w_solution->value2);
        } else if (is_i_side(rep.kind)) {
            lhs = format_number(rep.value);
        } else {
            rhs = format_number(rep.value);
        }
        t.rows.push_back({std::to_string(k), format_number(rep.value), to_string(rep.kind), std::to_string(rep.l_A),
                          lhs, rhs});
    }
    return t;
}

CsvTable eq76(const RunConfig& base) {
    const Experiment exp = base.experiment();
    const OrderedKlSet F = build_f_set(exp.models, exp.truth);
    CsvTable t;
    t.header = {"k", "value", "formula", "u", "v", "x", "y"};
    for (int k = 1; k <= exp.num_sources(); ++k) {
        const SolutionV s = solve_v(k, exp.K, F);
        t.rows.push_back({std::to_string(k), format_number(s.value), format_number(reference_v_formula(k)),
                          std::to_string(s.u), std::to_string(s.v), s.has_x() ? format_number(s.x) : kDash,
                          s.has_y(k) ? format_number(s.y) : kDash});
    }
    return t;
}

CsvTable fig3(const RunConfig& base) {
    Experiment one = base.experiment();
    one.metric = Metric::Misclass;
    one.k = 1;
    Experiment five = one;
    five.k = 5;
    const double asymptote = difficulty_misclass(one.models, one.truth, 1, one.K).value /
                             difficulty_misclass(one.models, one.truth, 5, one.K).value;
    CsvTable t;
    t.header = {"abs_log10_alpha", "ratio", "se", "asymptote"};
    for (int e = 1; e <= 10; ++e) {
        one.alpha = five.alpha = std::pow(10.0, -e);
        t.rows.push_back(closed_form_ratio_row(five, one, base, e, asymptote));
    }
    return t;
}

CsvTable fig4(const RunConfig& base) {
    Experiment one = base.experiment();
    one.metric = Metric::Familywise;
    one.k1 = one.k2 = 1;
    Experiment three = one;
    three.k1 = three.k2 = 3;
    const double asymptote = difficulty_familywise(one.models, one.truth, 1, 1, one.K, 1.0).value /
                             difficulty_familywise(one.models, one.truth, 3, 3, one.K, 1.0).value;
    CsvTable t;
    t.header = {"abs_log10_alpha", "ratio", "se", "asymptote"};
    for (int e = 1; e <= 10; ++e) {
        one.alpha = one.beta = three.alpha = three.beta = std::pow(10.0, -e);
        t.rows.push_back(closed_form_ratio_row(three, one, base, e, asymptote));
    }
    return t;
}

// Calibrated E[T; k] / E[T; 1] for k = 1..k_max.
CsvTable calibrated_ratios(const RunConfig& base, Metric metric, int k_max) {
    Experiment exp = base.experiment();
    exp.metric = metric;
    exp.alpha = exp.beta = 1e-3;
    const CalibrationOptions opts = base.calibration_options();
    std::vector<MeanEstimate> T;
    for (int k = 1; k <= k_max; ++k) {
        exp.k = exp.k1 = exp.k2 = k;
        const Simulator sim(exp);
        T.push_back(calibrate_threshold(sim, exp.alpha, exp.beta, opts).T);
    }
    CsvTable t;
    t.header = {"k", "ratio", "se", "one_over_k"};
    for (int k = 1; k <= k_max; ++k) {
        const MeanEstimate& tk = T[static_cast<std::size_t>(k - 1)];
        const double se = k == 1 ? 0.0 : ratio_se(tk, T[0]);
        t.rows.push_back({std::to_string(k), format_number(tk.mean / T[0].mean), format_number(se),
                          format_number(1.0 / k)});
    }
    return t;
}

}  // namespace

Figure parse_figure(const std::string& text) {
    std::string s;
    for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "fig1") return Figure::Fig1;
    if (s == "fig2") return Figure::Fig2;
    if (s == "fig3") return Figure::Fig3;
    if (s == "fig4") return Figure::Fig4;
    if (s == "table1") return Figure::Table1;
    if (s == "eq76") return Figure::Eq76;
    if (s == "eq80") return Figure::Eq80;
    throw ConfigError("figure must be one of fig1, fig2, fig3, fig4, table1, eq76, eq80; got '" + text + "'");
}

std::string to_string(Figure f) {
    switch (f) {
        case Figure::Fig1: return "fig1";
        case Figure::Fig2: return "fig2";
        case Figure::Fig3: return "fig3";
        case Figure::Fig4: return "fig4";
        case Figure::Table1: return "table1";
        case Figure::Eq76: return "eq76";
        case Figure::Eq80: return "eq80";
    }
    return "unknown";
}

std::string CsvTable::to_csv() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double reference_v_formula(int k) {
    const std::vector<double> F = {0.125, 0.125, 0.125, 0.245, 0.245, 0.245, 0.245, 0.5, 0.5, 0.5};
    const double K = 5.0;
    const double M = 10.0;
    if (k >= 1 && k <= 5) return k * (K / M) * harmonic_tail(F, 1);
    if (k >= 6 && k <= 8) return (k - 3) * (K / (M - 3)) * harmonic_tail(F, 4);
    if (k == 9) return F[5] + F[6] + F[7] + F[8];
    if (k == 10) return F[5] + F[6] + F[7] + F[8] + F[9];
    throw InvalidArgument("k must be in [1, 10]");
}

CsvTable reproduce_figure(Figure which, const RunConfig& base) {
    switch (which) {
        case Figure::Fig1: return calibrated_ratios(base, Metric::Misclass, static_cast<int>(base.mus.size()));
        case Figure::Fig2: return calibrated_ratios(base, Metric::Familywise, static_cast<int>(base.mus.size()) / 2);
        case Figure::Fig3: return fig3(base);
        case Figure::Fig4: return fig4(base);
        case Figure::Table1: return table1(base);
        case Figure::Eq76: return eq76(base);
        case Figure::Eq80: return eq80(base);
    }
    throw InvalidArgument("unknown figure");
}

}  // namespace anomid
