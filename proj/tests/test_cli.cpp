#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "anomid/cli.hpp"
#include "anomid/config.hpp"
#include "anomid/error.hpp"
#include "anomid/figures.hpp"

using namespace anomid;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "anomid");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

// Splits one CSV line; commas inside double quotes do not split.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> f(1);
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            f.emplace_back();
        } else {
            f.back().push_back(c);
        }
    }
    return f;
}

}  // namespace

TEST_CASE("config text sets keys and ignores comments") {
    RunConfig cfg = reference_config();
    std::istringstream in(
        "# reference run\n"
        "metric = familywise\n"
        "k1 = 2   # tolerance\n"
        "k2=3\n"
        "\n"
        "truth = {1, 2}\n"
        "cp = auto\n"
        "sampler = forced\n");
    apply_config_text(cfg, in);
    CHECK(cfg.metric == Metric::Familywise);
    CHECK(cfg.k1 == 2);
    CHECK(cfg.k2 == 3);
    CHECK(cfg.truth == std::vector<int>{1, 2});
    CHECK(cfg.cp_auto);
    CHECK(cfg.sampler == SamplerMode::Forced);
    const auto e = cfg.experiment();
    CHECK(e.truth.to_string() == "{1,2}");
    CHECK(e.sampler.K == 5.0);
}

TEST_CASE("config errors name the problem") {
    RunConfig cfg = reference_config();
    CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "k", "two"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "runs", "0"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "topup", "maybe"), ConfigError);
    std::istringstream bad("k 3\n");
    CHECK_THROWS_AS(apply_config_text(cfg, bad), ConfigError);
    cfg.truth = {11};
    CHECK_THROWS_AS(cfg.experiment(), ConfigError);
}

TEST_CASE("solve prints the solver output") {
    const auto r = run({"solve", "--kappa", "1", "--K", "2", "--L", "1,2,4"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "value,x,y,u,v,c_prime");
    CHECK(split_fields(lines[1])[0] == "1");
    CHECK(lines[1].find("1;0.5;0.25") != std::string::npos);
}

TEST_CASE("two-list solve") {
    const auto r = run({"solve", "--kappa", "1", "--K", "5", "--L", "0.5,0.5,0.5,0.5,0.5", "--kappa2", "1", "--L2",
                        "0.5,0.5,0.5,0.5,0.5"});
    REQUIRE(r.code == 0);
    const auto f = split_fields(split_lines(r.out).at(1));
    CHECK(std::stod(f[2]) == doctest::Approx(2.5));
    CHECK(std::stod(f[3]) == doctest::Approx(2.5));
}

TEST_CASE("invalid tolerances exit with an error") {
    const auto r = run({"alloc", "--metric", "familywise", "--k1", "6", "--k2", "5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") == 0);
    CHECK(run({"alloc", "--nonsense", "1"}).code != 0);
    CHECK(run({}).code != 0);
}

TEST_CASE("alloc lists every source") {
    const auto r = run({"alloc", "--k", "5"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "source,mu,anomalous,c_star,case,l_A,difficulty");
    double total = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) total += std::stod(split_fields(lines[i])[3]);
    CHECK(total == doctest::Approx(5.0));
}

TEST_CASE("trace ends at the stopping instant") {
    const auto r = run({"trace", "--alpha", "0.01", "--seed", "4"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() >= 2);
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) CHECK(split_fields(lines[i])[3] == "0");
    CHECK(split_fields(lines.back())[3] != "0");
}

TEST_CASE("reproduced table is stable and written to --out") {
    const auto path = (std::filesystem::temp_directory_path() / "anomid_table1_test.csv").string();
    const auto a = run({"reproduce", "--figure", "table1", "--out", path});
    REQUIRE(a.code == 0);
    CHECK(a.out.empty());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto b = run({"reproduce", "--figure", "table1"});
    CHECK(ss.str() == b.out);
    std::filesystem::remove(path);
    const auto lines = split_lines(b.out);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "k1_eq_k2,l_A,x1,x2,y1,y2,case,value");
    CHECK(lines[1].rfind("1,0,-,-,", 0) == 0);
}

TEST_CASE("closed-form table matches the solver") {
    const auto t = reproduce_figure(Figure::Eq76, reference_config());
    REQUIRE(t.rows.size() == 10);
    for (const auto& row : t.rows) CHECK(std::abs(std::stod(row[1]) - std::stod(row[2])) <= 1e-12);
}

TEST_CASE("simulate is reproducible across thread counts") {
    const auto a = run({"simulate", "--runs", "200", "--alpha", "0.01", "--seed", "8", "--threads", "1"});
    const auto b = run({"simulate", "--runs", "200", "--alpha", "0.01", "--seed", "8", "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(parse_figure("fig3") == Figure::Fig3);
    CHECK_THROWS_AS(parse_figure("fig9"), ConfigError);
}
