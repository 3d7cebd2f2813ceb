#include "anomid/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "anomid/allocation.hpp"
#include "anomid/config.hpp"
#include "anomid/error.hpp"
#include "anomid/figures.hpp"
#include "anomid/maxmin.hpp"
#include "anomid/sim.hpp"

namespace anomid {

namespace {

const char* key_help(const std::string& key) {
    static const std::map<std::string, const char*> help = {
        {"mus", "comma-separated source means; sets M"},
        {"truth", "1-based ids of the anomalous sources, e.g. 1,2,3"},
        {"metric", "misclass | familywise"},
        {"k", "misclassification tolerance"},
        {"k1", "false-positive tolerance"},
        {"k2", "false-negative tolerance"},
        {"K", "sampling budget per instant"},
        {"alpha", "error target (false positives for familywise)"},
        {"beta", "false-negative target"},
        {"runs", "Monte Carlo trials"},
        {"seed", "root seed"},
        {"sampler", "auto | plain | forced"},
        {"delta", "forced-exploration exponent"},
        {"cp", "forced-exploration scale, or auto"},
        {"topup", "sample exactly floor(K) sources per instant (true|false)"},
        {"horizon", "step limit per trial"},
        {"threads", "worker threads, 0 = all cores"},
        {"calibration", "joint | independent (familywise threshold search)"},
    };
    return help.at(key);
}

std::string join(const std::vector<double>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s.push_back(sep);
        s += format_number(v[i]);
    }
    return s;
}

// Config file plus per-key overrides shared by the run-type subcommands.
struct ConfigOptions {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) options[key] = app->add_option("--" + key, values[key], key_help(key));
    }

    RunConfig resolve() const {
        RunConfig cfg = reference_config();
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        for (const auto& key : config_keys()) {
            if (options.at(key)->count() > 0) apply_setting(cfg, key, values.at(key));
        }
        return cfg;
    }
};

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out_path + "'");
    f << text;
}

std::string solve_csv(int kappa, double K, const std::vector<double>& L, int kappa2, const std::vector<double>& L2,
                      double r) {
    CsvTable t;
    if (L2.empty()) {
        const SolutionV s = solve_v(kappa, K, L);
        t.header = {"value", "x", "y", "u", "v", "c_prime"};
        t.rows.push_back({format_number(s.value), format_number(s.x), format_number(s.y), std::to_string(s.u),
                          std::to_string(s.v), join(s.c_prime, ';')});
    } else {
        const SolutionW w = solve_w(kappa, kappa2, K, L, L2, r);
        t.header = {"value", "value2", "K1_star", "K2_star", "x1", "y1", "u1", "v1", "x2", "y2", "u2", "v2",
                    "c_hat", "c_check"};
        t.rows.push_back({format_number(w.value), format_number(w.value2), format_number(w.K1_star),
                          format_number(w.K2_star), format_number(w.branch1.x), format_number(w.branch1.y),
                          std::to_string(w.branch1.u), std::to_string(w.branch1.v), format_number(w.branch2.x),
                          format_number(w.branch2.y), std::to_string(w.branch2.u), std::to_string(w.branch2.v),
                          join(w.branch1.c_prime, ';'), join(w.branch2.c_prime, ';')});
    }
    return t.to_csv();
}

std::string alloc_csv(const RunConfig& cfg) {
    const Experiment exp = cfg.experiment();
    const DifficultyReport rep = exp.metric == Metric::Misclass
                                     ? difficulty_misclass(exp.models, exp.truth, exp.k, exp.K)
                                     : difficulty_familywise(exp.models, exp.truth, exp.k1, exp.k2, exp.K, exp.ratio());
    const AllocationVector c = allocation_from_report(rep, exp.num_sources());
    CsvTable t;
    t.header = {"source", "mu", "anomalous", "c_star", "case", "l_A", "difficulty"};
    for (int i = 0; i < exp.num_sources(); ++i) {
        t.rows.push_back({std::to_string(i + 1), format_number(exp.models[i].mu()), exp.truth.contains(i) ? "1" : "0",
                          format_number(c.c[i]), to_string(rep.kind), std::to_string(rep.l_A),
                          format_number(rep.value)});
    }
    return t.to_csv();
}

std::string trace_csv(const RunConfig& cfg) {
    const Simulator sim(cfg.experiment());
    const Experiment& exp = sim.experiment();
    const Thresholds thr = closed_form_thresholds(exp);
    CsvTable t;
    t.header = {"n", "sampled", "estimate", "stopped"};
    for (int i = 1; i <= exp.num_sources(); ++i) t.header.push_back("llr_" + std::to_string(i));
    auto rng = trial_rng(cfg.seed, 0);
    sim.walk(rng, exp.horizon, [&](const RunState& st, const Hypothesis& sampled) {
        const StopDecision d = exp.metric == Metric::Misclass ? check_sum_intersection(st, exp.k, thr.d)
                                                              : check_leap(st, exp.k1, exp.k2, thr.a, thr.b);
        std::vector<std::string> row = {std::to_string(st.n), "\"" + sampled.to_string() + "\"",
                                        "\"" + st.estimate.to_string() + "\"",
                                        d.stopped ? "\"" + d.decided.to_string() + "\"" : "0"};
        for (double v : st.llr) row.push_back(format_number(v));
        t.rows.push_back(std::move(row));
        return d.stopped;
    });
    return t.to_csv();
}

std::string simulate_csv(const RunConfig& cfg) {
    const Simulator sim(cfg.experiment());
    const McSummary s = monte_carlo(sim, closed_form_thresholds(sim.experiment()), cfg.runs, cfg.seed, cfg.threads);
    CsvTable t;
    t.header = {"metric", "sampler", "runs", "mean_T", "se_T", "mean_samples", "misclass_rate", "misclass_lo",
                "misclass_hi", "false_pos_rate", "false_pos_lo", "false_pos_hi", "false_neg_rate", "false_neg_lo",
                "false_neg_hi", "consistent"};
    t.rows.push_back({to_string(sim.experiment().metric), to_string(sim.mode()), std::to_string(s.runs),
                      format_number(s.mean_T), format_number(s.se_T), format_number(s.mean_samples),
                      format_number(s.misclass.rate), format_number(s.misclass.lower), format_number(s.misclass.upper),
                      format_number(s.false_pos.rate), format_number(s.false_pos.lower),
                      format_number(s.false_pos.upper), format_number(s.false_neg.rate),
                      format_number(s.false_neg.lower), format_number(s.false_neg.upper), std::to_string(s.consistent)});
    return t.to_csv();
}

std::string calibrate_csv(const RunConfig& cfg) {
    const Simulator sim(cfg.experiment());
    const Experiment& exp = sim.experiment();
    const CalibrationResult r = calibrate_threshold(sim, exp.alpha, exp.beta, cfg.calibration_options());
    const Thresholds closed = closed_form_thresholds(exp);
    CsvTable t;
    t.header = {"metric", "d", "a", "b", "closed_d", "closed_a", "closed_b", "rate", "rate2", "mean_T", "se_T",
                "rounds"};
    t.rows.push_back({to_string(exp.metric), format_number(r.thresholds.d), format_number(r.thresholds.a),
                      format_number(r.thresholds.b), format_number(closed.d), format_number(closed.a),
                      format_number(closed.b), format_number(r.rate), format_number(r.rate2), format_number(r.T.mean),
                      format_number(r.T.se), std::to_string(r.rounds)});
    return t.to_csv();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sequential anomaly identification under a sampling budget"};
    app.require_subcommand(1, 1);
    std::string out_path;
    app.add_option("--out", out_path, "write CSV here instead of stdout");

    auto* solve = app.add_subcommand("solve", "solve the budgeted max-min allocation problem");
    int kappa = 1;
    int kappa2 = 1;
    double K = 1.0;
    double r = 1.0;
    std::string L_text;
    std::string L2_text;
    solve->add_option("--kappa", kappa, "tolerance for the first list")->required();
    solve->add_option("--K", K, "budget")->required();
    solve->add_option("--L", L_text, "ascending positive rates, comma-separated")->required();
    solve->add_option("--kappa2", kappa2, "tolerance for the second list");
    solve->add_option("--L2", L2_text, "second list; switches to the two-list problem");
    solve->add_option("--r", r, "weight of the second list");

    ConfigOptions alloc_opts, trace_opts, simulate_opts, calibrate_opts, reproduce_opts;
    alloc_opts.attach(app.add_subcommand("alloc", "difficulty and target sampling frequencies under the true set"));
    trace_opts.attach(app.add_subcommand("trace", "one trial, one CSV row per sampling instant"));
    simulate_opts.attach(app.add_subcommand("simulate", "Monte Carlo run with closed-form thresholds"));
    calibrate_opts.attach(app.add_subcommand("calibrate", "search thresholds that meet the error targets"));
    auto* reproduce = app.add_subcommand("reproduce", "regenerate a reference figure or table as CSV");
    reproduce_opts.attach(reproduce);
    std::string figure;
    reproduce->add_option("--figure", figure, "fig1 | fig2 | fig3 | fig4 | table1 | eq76 | eq80")->required();
    for (auto* sub : app.get_subcommands({})) sub->add_option("--out", out_path, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        std::string text;
        if (solve->parsed()) {
            text = solve_csv(kappa, K, parse_double_list(L_text), kappa2, parse_double_list(L2_text), r);
        } else if (app.got_subcommand("alloc")) {
            text = alloc_csv(alloc_opts.resolve());
        } else if (app.got_subcommand("trace")) {
            text = trace_csv(trace_opts.resolve());
        } else if (app.got_subcommand("simulate")) {
            text = simulate_csv(simulate_opts.resolve());
        } else if (app.got_subcommand("calibrate")) {
            text = calibrate_csv(calibrate_opts.resolve());
        } else {
            text = reproduce_figure(parse_figure(figure), reproduce_opts.resolve()).to_csv();
        }
        emit(text, out_path, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace anomid
