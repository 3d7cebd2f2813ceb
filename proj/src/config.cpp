#include "anomid/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "anomid/error.hpp"

namespace anomid {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
    Int v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::string body = trim(text);
    if (!body.empty() && body.front() == '{' && body.back() == '}') body = body.substr(1, body.size() - 2);
    std::vector<std::string> parts;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split_list(text)) out.push_back(to_double("list", p));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& p : split_list(text)) out.push_back(to_int<int>("list", p));
    return out;
}

Experiment RunConfig::experiment() const {
    Experiment e;
    if (mus.empty()) throw ConfigError("'mus' must list at least one source mean");
    e.models = gaussian_sources(mus);
    const int m = static_cast<int>(mus.size());
    if (m > kMaxSources) throw ConfigError("at most 64 sources are supported");
    std::vector<int> zero_based;
    for (int id : truth) {
        if (id < 1 || id > m) throw ConfigError("'truth' ids must be in [1, " + std::to_string(m) + "]");
        zero_based.push_back(id - 1);
    }
    e.truth = Hypothesis::of(m, zero_based);
    e.metric = metric;
    e.k = k;
    e.k1 = k1;
    e.k2 = k2;
    e.K = K;
    e.alpha = alpha;
    e.beta = beta;
    e.sampler.K = K;
    e.sampler.delta = delta;
    e.sampler.cp = cp;
    e.sampler.cp_auto = cp_auto;
    e.sampler.mode = sampler;
    e.sampler.top_up = topup;
    e.horizon = horizon;
    e.validate();
    return e;
}

CalibrationOptions RunConfig::calibration_options() const {
    CalibrationOptions o;
    o.runs = runs;
    o.seed = seed;
    o.threads = threads;
    o.mode = calibration;
    return o;
}

RunConfig reference_config() {
    RunConfig c;
    c.mus = {0.5, 0.5, 0.5, 0.7, 0.7, 0.7, 0.7, 1.0, 1.0, 1.0};
    c.truth = {1, 2, 3, 4, 5};
    c.K = 5.0;
    return c;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {"mus",   "truth", "metric",  "k",    "k1",     "k2",
                                                  "K",     "alpha", "beta",    "runs", "seed",   "sampler",
                                                  "delta", "cp",    "topup",   "horizon", "threads", "calibration"};
    return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "mus") {
        cfg.mus = parse_double_list(value);
    } else if (key == "truth") {
        cfg.truth = parse_int_list(value);
    } else if (key == "metric") {
        cfg.metric = parse_metric(value);
    } else if (key == "k") {
        cfg.k = to_int<int>(key, value);
    } else if (key == "k1") {
        cfg.k1 = to_int<int>(key, value);
    } else if (key == "k2") {
        cfg.k2 = to_int<int>(key, value);
    } else if (key == "K") {
        cfg.K = to_double(key, value);
    } else if (key == "alpha") {
        cfg.alpha = to_double(key, value);
    } else if (key == "beta") {
        cfg.beta = to_double(key, value);
    } else if (key == "runs") {
        cfg.runs = to_int<std::int64_t>(key, value);
        if (cfg.runs < 1) throw ConfigError("'runs' must be at least 1");
    } else if (key == "seed") {
        cfg.seed = to_int<std::uint64_t>(key, value);
    } else if (key == "sampler") {
        cfg.sampler = parse_sampler_mode(value);
    } else if (key == "delta") {
        cfg.delta = to_double(key, value);
    } else if (key == "cp") {
        cfg.cp_auto = value == "auto";
        cfg.cp = cfg.cp_auto ? 0.01 : to_double(key, value);
    } else if (key == "topup") {
        cfg.topup = to_bool(key, value);
    } else if (key == "horizon") {
        cfg.horizon = to_int<std::int64_t>(key, value);
    } else if (key == "threads") {
        cfg.threads = to_int<int>(key, value);
    } else if (key == "calibration") {
        cfg.calibration = parse_calibration_mode(value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    apply_config_text(cfg, in, path);
}

}  // namespace anomid
