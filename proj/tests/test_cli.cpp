#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "mshift/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("mshift");
    for (const auto& a : args) argv.push_back(a.c_str());
    return mshift::cli::run(static_cast<int>(argv.size()), argv.data());
}

class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(fs::temp_directory_path() / ("mshift_cli_" + tag)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string str() const { return path_.string(); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::string data_path(const char* name) { return std::string(TEST_DATA_DIR) + "/" + name; }

const char* kOutcomeHeader =
    "s,t,budget,avg_d,avg_f,avg_cost,realized_budget,modal_shift,n_vehicles,max_load";
const char* kComparisonHeader =
    "base_avg_d,opt_avg_d,avg_d_change_pct,"
    "base_modal_shift,opt_modal_shift,base_modal_shift_demand,opt_modal_shift_demand,"
    "base_avg_cost,opt_avg_cost,avg_cost_change_pct,"
    "opt_subsidy,opt_tax,opt_realized_budget,"
    "base_n_vehicles,opt_n_vehicles,base_max_load,opt_max_load";

} // namespace

TEST_CASE("cli rejects missing or unknown commands and flags") {
    CHECK(run_cli({}) != 0);
    CHECK(run_cli({"no-such-command"}) != 0);
    CHECK(run_cli({"gen", "--bogus"}) != 0);
    CHECK(run_cli({"gen", "--geography", "nowhere"}) != 0);
    CHECK(run_cli({"gen", "--subsidy", "1.5"}) != 0); // outside [0, 1]
}

TEST_CASE("gen writes deterministic instance files") {
    TempDir a("gen_a"), b("gen_b");
    const std::vector<std::string> args = {"gen",   "--seed",  "4",      "--scenarios", "2",
                                           "--requests", "6", "--stations", "2"};
    auto with_out = [&](const TempDir& d) {
        std::vector<std::string> v = args;
        v.push_back("--out");
        v.push_back(d.str());
        return v;
    };
    REQUIRE(run_cli(with_out(a)) == mshift::cli::exit_ok);
    REQUIRE(run_cli(with_out(b)) == mshift::cli::exit_ok);

    const fs::path f0 = a / "Inter-Rand-W_00.json";
    const fs::path f1 = a / "Inter-Rand-W_01.json";
    REQUIRE(fs::exists(f0));
    REQUIRE(fs::exists(f1));
    CHECK(slurp(f0) != slurp(f1));          // scenarios differ in the sampling
    CHECK(slurp(f0) == slurp(b / "Inter-Rand-W_00.json")); // reruns do not
    CHECK(slurp(f1) == slurp(b / "Inter-Rand-W_01.json"));

    const std::string cfg = slurp(a / "gen_config.json");
    CHECK(cfg.find("\"scenario_seeds\"") != std::string::npos);
    CHECK(cfg.find("\"seed\": 4") != std::string::npos);
}

TEST_CASE("config file settings load and flags override them") {
    TempDir dir("cfg");
    const fs::path cfg_path = dir / "settings.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"seed": 9, "gen": {"n_requests": 3, "n_stations": 2}})";
    }
    REQUIRE(run_cli({"gen", "--config", cfg_path.string(), "--seed", "11", "--out",
                     dir.str()}) == mshift::cli::exit_ok);
    const std::string logged = slurp(dir / "gen_config.json");
    CHECK(logged.find("\"seed\": 11") != std::string::npos); // flag beats file
    CHECK(logged.find("\"n_requests\": 3") != std::string::npos);

    const fs::path bad_path = dir / "bad.json";
    {
        std::ofstream out(bad_path);
        out << R"({"sed": 9})";
    }
    CHECK(run_cli({"gen", "--config", bad_path.string(), "--out", dir.str()}) ==
          mshift::cli::exit_usage);
}

TEST_CASE("compare tabulates base versus balanced policy") {
    TempDir a("cmp_a"), b("cmp_b");
    const std::vector<std::string> base = {"compare", "--solver", "oracle", "--seed", "2",
                                           "--requests", "3", "--stations", "2"};
    auto with_out = [&](const TempDir& d) {
        auto v = base;
        v.insert(v.end(), {"--out", d.str()});
        return v;
    };
    REQUIRE(run_cli(with_out(a)) == mshift::cli::exit_ok);
    REQUIRE(run_cli(with_out(b)) == mshift::cli::exit_ok);

    const std::string csv = slurp(a / "compare.csv");
    CHECK(first_line(csv) == std::string("family,scenarios,") + kComparisonHeader);
    CHECK(line_count(csv) == 2);
    CHECK(csv.find("\nInter-Rand-W,1,") != std::string::npos);
    CHECK(slurp(b / "compare.csv") == csv); // same seed, same numbers
    CHECK(fs::exists(a / "compare_config.json"));
}

TEST_CASE("compare with a fixed subsidy balances by bisection") {
    TempDir dir("cmp_sub");
    // s = 0 spends nothing, so the zero-budget root is the t = 0 endpoint;
    // this exercises the bisection path without depending on the geometry
    REQUIRE(run_cli({"compare", "--solver", "oracle", "--seed", "3", "--requests", "2",
                     "--stations", "2", "--subsidy", "0", "--out", dir.str()}) ==
            mshift::cli::exit_ok);
    const std::string csv = slurp(dir / "compare.csv");
    CHECK(line_count(csv) == 2);
    CHECK(csv.find(",0,0,") != std::string::npos); // opt_subsidy, opt_tax
}

TEST_CASE("an unreachable budget exits with the infeasible code") {
    TempDir dir("cmp_bad");
    CHECK(run_cli({"compare", "--solver", "oracle", "--seed", "3", "--requests", "2",
                   "--stations", "2", "--budget", "1000000", "--out", dir.str()}) ==
          mshift::cli::exit_infeasible);
}

TEST_CASE("sensitivity sweeps scatteredness") {
    TempDir dir("sens");
    const fs::path cfg_path = dir / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"sensitivity": {"axis": "scatteredness", "k_grid": [0.5, 1.0]}})";
    }
    REQUIRE(run_cli({"sensitivity", "--config", cfg_path.string(), "--solver", "oracle",
                     "--seed", "2", "--requests", "3", "--stations", "2", "--out",
                     dir.str()}) == mshift::cli::exit_ok);
    const std::string csv = slurp(dir / "sensitivity.csv");
    CHECK(first_line(csv) ==
          std::string("axis,value,") + kOutcomeHeader + ",total_system_cost");
    CHECK(line_count(csv) == 3);
    CHECK(csv.find("\nscatteredness,0.5,") != std::string::npos);
    CHECK(csv.find("\nscatteredness,1,") != std::string::npos);
}

TEST_CASE("pareto writes the frontier table") {
    TempDir a("par_a"), b("par_b");
    const fs::path cfg_path = a / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"bracket_hi": 50, "pareto": {"subsidy_grid": [0.5, 1.0], "budget_ratios": [0.0]}})";
    }
    const std::vector<std::string> base = {"pareto", "--config", cfg_path.string(),
                                           "--solver", "oracle", "--seed", "2",
                                           "--requests", "3", "--stations", "2"};
    auto with_out = [&](const TempDir& d) {
        auto v = base;
        v.insert(v.end(), {"--out", d.str()});
        return v;
    };
    REQUIRE(run_cli(with_out(a)) == mshift::cli::exit_ok);
    const std::string csv = slurp(a / "pareto.csv");
    CHECK(first_line(csv) == kOutcomeHeader);
    CHECK(line_count(csv) >= 2); // at least the full-subsidy row balances
    REQUIRE(run_cli(with_out(b)) == mshift::cli::exit_ok);
    CHECK(slurp(b / "pareto.csv") == csv);
    CHECK(fs::exists(a / "pareto_omitted.csv"));
}

TEST_CASE("verify reports clean sets and flags the corrupted control") {
    TempDir dir("ver");
    REQUIRE(run_cli({"verify", "--sets", "3", "--trials", "200", "--seed", "5", "--out",
                     dir.str()}) == mshift::cli::exit_ok);
    const std::string csv = slurp(dir / "verify.csv");
    CHECK(first_line(csv) == "set,label,phi,n_alts,trials,samples,violations");
    CHECK(line_count(csv) == 5); // example row + three random sets
    CHECK(csv.find("\n0,example-1,") != std::string::npos);

    TempDir bad("ver_bad");
    CHECK(run_cli({"verify", "--sets", "1", "--trials", "100", "--negative-control",
                   "--out", bad.str()}) == mshift::cli::exit_violation);
    CHECK(line_count(slurp(bad / "verify_violations.csv")) >= 2);
}

TEST_CASE("berlin tabulates the sampled case per tariff") {
    TempDir dir("ber");
    REQUIRE(run_cli({"berlin", "--pool", data_path("berlin_pool.txt"), "--sbahn",
                     data_path("sbahn_berlin.json"), "--requests", "3", "--tariffs", "2.4",
                     "--seed", "2", "--max-iter", "400", "--out", dir.str()}) ==
            mshift::cli::exit_ok);
    const std::string csv = slurp(dir / "berlin.csv");
    CHECK(first_line(csv) == std::string("tariff,scenarios,") + kComparisonHeader);
    CHECK(line_count(csv) == 2);
    CHECK(csv.find("\n2.4,1,") != std::string::npos);

    // a missing pool file is a usage problem, not a crash
    CHECK(run_cli({"berlin", "--pool", (dir / "nope.txt").string(), "--sbahn",
                   data_path("sbahn_berlin.json"), "--out", dir.str()}) ==
          mshift::cli::exit_usage);
}
