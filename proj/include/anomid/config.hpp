#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "anomid/sim.hpp"

namespace anomid {

// Everything a run needs, in the form it is written in a config file.
// Source ids in `truth` are 1-based.
struct RunConfig {
    std::vector<double> mus;
    std::vector<int> truth;
    Metric metric = Metric::Misclass;
    int k = 1;
    int k1 = 1;
    int k2 = 1;
    double K = 5.0;
    double alpha = 1e-3;
    double beta = 1e-3;
    std::int64_t runs = 10'000;
    std::uint64_t seed = 1;
    SamplerMode sampler = SamplerMode::Auto;
    double delta = 0.2;
    double cp = 0.01;
    bool cp_auto = false;  // "cp = auto": 0.01 or less if the targets require it
    bool topup = true;
    std::int64_t horizon = 10'000'000;
    int threads = 0;
    CalibrationMode calibration = CalibrationMode::Independent;

    Experiment experiment() const;
    CalibrationOptions calibration_options() const;
};

// Ten unit-variance Gaussian sources with means 0.5 (x3), 0.7 (x4), 1 (x3),
// sources 1..5 anomalous, K = 5.
RunConfig reference_config();

// Recognized keys, in the order they are documented.
const std::vector<std::string>& config_keys();

// Sets one key from its text form; ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// key = value lines; '#' starts a comment; blank lines are ignored.
void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin = "config");
void apply_config_file(RunConfig& cfg, const std::string& path);

std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace anomid
