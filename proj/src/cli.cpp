// Subcommand driver behind the mshift binary. Settings resolve in three
// layers (built-in defaults, then --config JSON, then explicit flags); every
// command writes the resolved configuration next to its outputs and emits
// fixed-schema CSV, so reruns with identical inputs are byte-identical.

#include "mshift/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mshift/alns.hpp"
#include "mshift/errors.hpp"
#include "mshift/ingest.hpp"
#include "mshift/instgen.hpp"
#include "mshift/json_io.hpp"
#include "mshift/policy.hpp"
#include "mshift/rng.hpp"
#include "mshift/types.hpp"

namespace mshift::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad invocation or an unusable referenced file; maps to exit_usage.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// ---- resolved settings -------------------------------------------------------

struct FamilyEntry {
    std::string name;
    instgen::GenSpec spec;
};

struct Config {
    std::uint64_t seed = 1;
    int scenarios = 1;
    std::string out_dir = ".";
    std::string solver = "alns"; // or "oracle" (exhaustive, guard-rail sized only)
    double budget = 0.0;
    std::optional<double> subsidy; // fixed-subsidy balancing instead of the closed form
    double eps = -1.0;             // budget tolerance; -1 = 1e-3 * max(1, |budget|)
    std::optional<int> max_iter;   // overrides alns.max_iterations when set
    double bracket_hi = 5.0;       // tax bracket upper end for bisection

    alns::AlnsParams alns;
    instgen::GenSpec gen;

    // compare: families to tabulate; empty means the gen spec alone
    std::vector<FamilyEntry> families;

    // pareto
    std::vector<double> subsidy_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                        0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> budget_ratios = {0.0, 0.25, 0.5}; // x avg full-subsidy flow cost

    // sensitivity
    std::string axis = "scatteredness"; // or "frequency"
    std::vector<double> k_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
    std::vector<int> frequencies = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    // verify
    int verify_sets = 100;
    long long verify_trials = 1000;
    bool negative_control = false;

    // berlin
    std::string pool_path = "data/berlin_pool.txt";
    std::string sbahn_path = "data/sbahn_berlin.json";
    std::vector<double> tariffs = {2.0, 2.4, 4.0, 4.8};
    ingest::CaseParams case_params;
};

// Everything the user may have typed; optionals so config-file values survive
// unless a flag really was given.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> scenarios;
    std::optional<std::string> out;
    std::optional<std::string> solver;
    std::optional<double> budget;
    std::optional<double> subsidy;
    std::optional<double> eps;
    std::optional<int> max_iter;

    std::optional<int> requests;
    std::optional<int> stations;
    std::optional<int> vehicles;
    std::optional<int> frequency;
    std::optional<double> scatteredness;
    std::optional<std::string> geography;
    std::optional<std::string> allocation;
    std::optional<std::string> tw_class;

    std::optional<std::string> axis;

    std::optional<int> sets;
    std::optional<long long> trials;
    bool negative_control = false;

    std::optional<std::string> pool;
    std::optional<std::string> sbahn;
    std::optional<int> case_requests;
    std::vector<double> tariffs;
};

// ---- small formatting helpers --------------------------------------------------

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += cells[i];
    }
    out.push_back('\n');
    return out;
}

// Quote a free-text cell when it would break the row.
std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

double pct_change(double from, double to) {
    return from != 0.0 ? (to - from) / from * 100.0 : 0.0;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << text;
    if (!out) throw UsageError("short write to " + path.string());
}

// ---- enum spellings -------------------------------------------------------------

instgen::Geography parse_geography(const std::string& s) {
    if (s == "intercity") return instgen::Geography::Intercity;
    if (s == "metro" || s == "metropolitan") return instgen::Geography::Metropolitan;
    throw UsageError("unknown geography '" + s + "' (want intercity|metro)");
}

instgen::Allocation parse_allocation(const std::string& s) {
    if (s == "different") return instgen::Allocation::Different;
    if (s == "random") return instgen::Allocation::Random;
    throw UsageError("unknown allocation '" + s + "' (want different|random)");
}

instgen::TwClass parse_tw_class(const std::string& s) {
    if (s == "tight") return instgen::TwClass::Tight;
    if (s == "wide") return instgen::TwClass::Wide;
    throw UsageError("unknown time-window class '" + s + "' (want tight|wide)");
}

std::string geography_name(instgen::Geography g) {
    return g == instgen::Geography::Intercity ? "intercity" : "metro";
}
std::string allocation_name(instgen::Allocation a) {
    return a == instgen::Allocation::Different ? "different" : "random";
}
std::string tw_class_name(instgen::TwClass t) {
    return t == instgen::TwClass::Tight ? "tight" : "wide";
}

// Short family tag in the usual Geo-Alloc-TW form, e.g. Inter-Rand-W.
std::string family_name(const instgen::GenSpec& g) {
    std::string out = g.geography == instgen::Geography::Intercity ? "Inter" : "Metro";
    out += g.allocation == instgen::Allocation::Different ? "-Diff" : "-Rand";
    out += g.tw_class == instgen::TwClass::Tight ? "-T" : "-W";
    return out;
}

// ---- config file ------------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& path) {
    if (!j.is_object()) throw UsageError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw UsageError(path + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void fetch(const json& j, const char* key, T& into, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        into = it->get<T>();
    } catch (const json::exception&) {
        throw UsageError(path + "." + key + ": wrong type");
    }
}

void apply_gen_json(instgen::GenSpec& g, const json& j, const std::string& path) {
    check_keys(j,
               {"geography", "allocation", "tw", "n_requests", "n_stations",
                "frequency_per_hour", "scatteredness_k", "n_vehicles", "vehicle_capacity",
                "vehicle_speed", "horizon_end"},
               path);
    std::string s;
    fetch(j, "geography", s, path);
    if (!s.empty()) g.geography = parse_geography(s);
    s.clear();
    fetch(j, "allocation", s, path);
    if (!s.empty()) g.allocation = parse_allocation(s);
    s.clear();
    fetch(j, "tw", s, path);
    if (!s.empty()) g.tw_class = parse_tw_class(s);
    fetch(j, "n_requests", g.n_requests, path);
    fetch(j, "n_stations", g.n_stations, path);
    fetch(j, "frequency_per_hour", g.frequency_per_hour, path);
    fetch(j, "scatteredness_k", g.scatteredness_k, path);
    fetch(j, "n_vehicles", g.n_vehicles, path);
    fetch(j, "vehicle_capacity", g.vehicle_capacity, path);
    fetch(j, "vehicle_speed", g.vehicle_speed, path);
    fetch(j, "horizon_end", g.horizon_end, path);
}

void apply_config_file(Config& c, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
    check_keys(j,
               {"seed", "scenarios", "out", "solver", "budget", "subsidy", "eps", "max_iter",
                "bracket_hi", "alns", "gen", "compare", "pareto", "sensitivity", "verify",
                "berlin"},
               path);

    fetch(j, "seed", c.seed, path);
    fetch(j, "scenarios", c.scenarios, path);
    fetch(j, "out", c.out_dir, path);
    fetch(j, "solver", c.solver, path);
    fetch(j, "budget", c.budget, path);
    if (j.contains("subsidy")) {
        double s = 0.0;
        fetch(j, "subsidy", s, path);
        c.subsidy = s;
    }
    fetch(j, "eps", c.eps, path);
    if (j.contains("max_iter")) {
        int it = 0;
        fetch(j, "max_iter", it, path);
        c.max_iter = it;
    }
    fetch(j, "bracket_hi", c.bracket_hi, path);

    if (auto it = j.find("alns"); it != j.end()) {
        const std::string p = path + ".alns";
        check_keys(*it,
                   {"max_iterations", "segment_length", "reaction_factor", "score_new_best",
                    "score_improving", "score_accepted", "start_temp_ratio", "cooling",
                    "remove_frac_min", "remove_frac_max", "noise_amp", "noise_prob"},
                   p);
        fetch(*it, "max_iterations", c.alns.max_iterations, p);
        fetch(*it, "segment_length", c.alns.segment_length, p);
        fetch(*it, "reaction_factor", c.alns.reaction_factor, p);
        fetch(*it, "score_new_best", c.alns.score_new_best, p);
        fetch(*it, "score_improving", c.alns.score_improving, p);
        fetch(*it, "score_accepted", c.alns.score_accepted, p);
        fetch(*it, "start_temp_ratio", c.alns.start_temp_ratio, p);
        fetch(*it, "cooling", c.alns.cooling, p);
        fetch(*it, "remove_frac_min", c.alns.remove_frac_min, p);
        fetch(*it, "remove_frac_max", c.alns.remove_frac_max, p);
        fetch(*it, "noise_amp", c.alns.noise_amp, p);
        fetch(*it, "noise_prob", c.alns.noise_prob, p);
    }
    if (auto it = j.find("gen"); it != j.end()) apply_gen_json(c.gen, *it, path + ".gen");
    if (auto it = j.find("compare"); it != j.end()) {
        const std::string p = path + ".compare";
        check_keys(*it, {"families"}, p);
        if (auto fit = it->find("families"); fit != it->end()) {
            if (!fit->is_array()) throw UsageError(p + ".families: expected an array");
            int idx = 0;
            for (const json& entry : *fit) {
                const std::string ep = p + ".families[" + std::to_string(idx++) + "]";
                FamilyEntry fe;
                fe.spec = c.gen;
                if (!entry.is_object()) throw UsageError(ep + ": expected an object");
                json patch = entry;
                if (patch.contains("name")) {
                    fetch(patch, "name", fe.name, ep);
                    patch.erase("name");
                }
                apply_gen_json(fe.spec, patch, ep);
                if (fe.name.empty()) fe.name = family_name(fe.spec);
                c.families.push_back(std::move(fe));
            }
        }
    }
    if (auto it = j.find("pareto"); it != j.end()) {
        const std::string p = path + ".pareto";
        check_keys(*it, {"subsidy_grid", "budget_ratios"}, p);
        fetch(*it, "subsidy_grid", c.subsidy_grid, p);
        fetch(*it, "budget_ratios", c.budget_ratios, p);
    }
    if (auto it = j.find("sensitivity"); it != j.end()) {
        const std::string p = path + ".sensitivity";
        check_keys(*it, {"axis", "k_grid", "frequencies"}, p);
        fetch(*it, "axis", c.axis, p);
        fetch(*it, "k_grid", c.k_grid, p);
        fetch(*it, "frequencies", c.frequencies, p);
    }
    if (auto it = j.find("verify"); it != j.end()) {
        const std::string p = path + ".verify";
        check_keys(*it, {"sets", "trials", "negative_control"}, p);
        fetch(*it, "sets", c.verify_sets, p);
        fetch(*it, "trials", c.verify_trials, p);
        fetch(*it, "negative_control", c.negative_control, p);
    }
    if (auto it = j.find("berlin"); it != j.end()) {
        const std::string p = path + ".berlin";
        check_keys(*it,
                   {"pool", "sbahn", "tariffs", "n_requests", "n_depots", "n_vehicles",
                    "vehicle_capacity", "vehicle_speed", "phi", "tw_width", "horizon_end"},
                   p);
        fetch(*it, "pool", c.pool_path, p);
        fetch(*it, "sbahn", c.sbahn_path, p);
        fetch(*it, "tariffs", c.tariffs, p);
        fetch(*it, "n_requests", c.case_params.n_requests, p);
        fetch(*it, "n_depots", c.case_params.n_depots, p);
        fetch(*it, "n_vehicles", c.case_params.n_vehicles, p);
        fetch(*it, "vehicle_capacity", c.case_params.vehicle_capacity, p);
        fetch(*it, "vehicle_speed", c.case_params.vehicle_speed, p);
        fetch(*it, "phi", c.case_params.phi, p);
        fetch(*it, "tw_width", c.case_params.tw_width, p);
        fetch(*it, "horizon_end", c.case_params.horizon_end, p);
    }
}

void apply_flags(Config& c, const Flags& f) {
    if (f.seed) c.seed = *f.seed;
    if (f.scenarios) c.scenarios = *f.scenarios;
    if (f.out) c.out_dir = *f.out;
    if (f.solver) c.solver = *f.solver;
    if (f.budget) c.budget = *f.budget;
    if (f.subsidy) c.subsidy = *f.subsidy;
    if (f.eps) c.eps = *f.eps;
    if (f.max_iter) c.max_iter = *f.max_iter;

    if (f.requests) c.gen.n_requests = *f.requests;
    if (f.stations) c.gen.n_stations = *f.stations;
    if (f.vehicles) c.gen.n_vehicles = *f.vehicles;
    if (f.frequency) c.gen.frequency_per_hour = *f.frequency;
    if (f.scatteredness) c.gen.scatteredness_k = *f.scatteredness;
    if (f.geography) c.gen.geography = parse_geography(*f.geography);
    if (f.allocation) c.gen.allocation = parse_allocation(*f.allocation);
    if (f.tw_class) c.gen.tw_class = parse_tw_class(*f.tw_class);

    if (f.axis) c.axis = *f.axis;

    if (f.sets) c.verify_sets = *f.sets;
    if (f.trials) c.verify_trials = *f.trials;
    if (f.negative_control) c.negative_control = true;

    if (f.pool) c.pool_path = *f.pool;
    if (f.sbahn) c.sbahn_path = *f.sbahn;
    if (f.case_requests) c.case_params.n_requests = *f.case_requests;
    if (!f.tariffs.empty()) c.tariffs = f.tariffs;
}

void validate_config(const Config& c) {
    if (c.scenarios < 1) throw UsageError("scenarios must be >= 1");
    if (c.solver != "alns" && c.solver != "oracle")
        throw UsageError("solver must be alns or oracle, got '" + c.solver + "'");
    if (!std::isfinite(c.budget)) throw UsageError("budget must be finite");
    if (c.subsidy && (*c.subsidy < 0.0 || *c.subsidy > 1.0))
        throw UsageError("subsidy must lie in [0, 1]");
    if (c.eps != -1.0 && c.eps <= 0.0) throw UsageError("eps must be positive (or -1 for auto)");
    if (c.max_iter && *c.max_iter < 1) throw UsageError("max_iter must be >= 1");
    if (c.bracket_hi <= 0.0) throw UsageError("bracket_hi must be positive");
    if (!c.gen.valid()) throw UsageError("generator spec out of range");
    for (double s : c.subsidy_grid)
        if (s < 0.0 || s > 1.0) throw UsageError("subsidy_grid entries must lie in [0, 1]");
    for (double r : c.budget_ratios)
        if (r < 0.0) throw UsageError("budget_ratios must be nonnegative");
    if (c.axis != "scatteredness" && c.axis != "frequency")
        throw UsageError("axis must be scatteredness or frequency, got '" + c.axis + "'");
    for (double k : c.k_grid)
        if (k < 0.0) throw UsageError("k_grid entries must be nonnegative");
    for (int fq : c.frequencies)
        if (fq < 1) throw UsageError("frequencies must be >= 1");
    if (c.verify_sets < 0) throw UsageError("verify sets must be >= 0");
    if (c.verify_trials < 1) throw UsageError("verify trials must be >= 1");
    if (c.tariffs.empty()) throw UsageError("tariff list must not be empty");
    for (double t : c.tariffs)
        if (t <= 0.0) throw UsageError("tariffs must be positive");
}

// ---- resolved-config log --------------------------------------------------------

json gen_json(const instgen::GenSpec& g) {
    json j;
    j["geography"] = geography_name(g.geography);
    j["allocation"] = allocation_name(g.allocation);
    j["tw"] = tw_class_name(g.tw_class);
    j["n_requests"] = g.n_requests;
    j["n_stations"] = g.n_stations;
    j["frequency_per_hour"] = g.frequency_per_hour;
    j["scatteredness_k"] = g.scatteredness_k;
    j["n_vehicles"] = g.n_vehicles;
    j["vehicle_capacity"] = g.vehicle_capacity;
    j["vehicle_speed"] = g.vehicle_speed;
    j["horizon_end"] = g.horizon_end;
    j["seed"] = g.seed;
    return j;
}

json resolved_json(const Config& c, const std::string& command) {
    json j;
    j["command"] = command;
    j["seed"] = c.seed;
    j["scenarios"] = c.scenarios;
    j["out"] = c.out_dir;
    j["solver"] = c.solver;
    j["budget"] = c.budget;
    j["subsidy"] = c.subsidy ? json(*c.subsidy) : json();
    j["eps"] = c.eps;
    j["bracket_hi"] = c.bracket_hi;
    j["max_iter"] = c.max_iter ? *c.max_iter : c.alns.max_iterations;
    j["alns"] = {{"max_iterations", c.max_iter ? *c.max_iter : c.alns.max_iterations},
                 {"segment_length", c.alns.segment_length},
                 {"reaction_factor", c.alns.reaction_factor},
                 {"score_new_best", c.alns.score_new_best},
                 {"score_improving", c.alns.score_improving},
                 {"score_accepted", c.alns.score_accepted},
                 {"start_temp_ratio", c.alns.start_temp_ratio},
                 {"cooling", c.alns.cooling},
                 {"remove_frac_min", c.alns.remove_frac_min},
                 {"remove_frac_max", c.alns.remove_frac_max}};
    j["gen"] = gen_json(c.gen);
    if (!c.families.empty()) {
        json fams = json::array();
        for (const FamilyEntry& fe : c.families) {
            json f = gen_json(fe.spec);
            f["name"] = fe.name;
            fams.push_back(std::move(f));
        }
        j["compare"] = {{"families", std::move(fams)}};
    }
    j["pareto"] = {{"subsidy_grid", c.subsidy_grid}, {"budget_ratios", c.budget_ratios}};
    j["sensitivity"] = {{"axis", c.axis}, {"k_grid", c.k_grid}, {"frequencies", c.frequencies}};
    j["verify"] = {{"sets", c.verify_sets},
                   {"trials", c.verify_trials},
                   {"negative_control", c.negative_control}};
    j["berlin"] = {{"pool", c.pool_path},
                   {"sbahn", c.sbahn_path},
                   {"tariffs", c.tariffs},
                   {"n_requests", c.case_params.n_requests},
                   {"n_depots", c.case_params.n_depots},
                   {"n_vehicles", c.case_params.n_vehicles},
                   {"vehicle_capacity", c.case_params.vehicle_capacity},
                   {"vehicle_speed", c.case_params.vehicle_speed},
                   {"phi", c.case_params.phi},
                   {"tw_width", c.case_params.tw_width},
                   {"horizon_end", c.case_params.horizon_end}};
    return j;
}

void log_config(const Config& c, const std::string& command, const json& extra = json()) {
    json j = resolved_json(c, command);
    if (extra.is_object())
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_text_file(fs::path(c.out_dir) / (command + "_config.json"), j.dump(2) + "\n");
}

// ---- solver plumbing --------------------------------------------------------------

policy::SolverConfig solver_config(const Config& c) {
    policy::SolverConfig sc;
    sc.kind = c.solver == "oracle" ? policy::SolverKind::Exact : policy::SolverKind::Alns;
    sc.alns = c.alns;
    if (c.max_iter) sc.alns.max_iterations = *c.max_iter;
    sc.seed = c.seed;
    return sc;
}

std::unique_ptr<policy::CarrierModel> model_for(const Config& c, std::vector<Instance> insts) {
    return policy::make_instance_model(std::move(insts), solver_config(c));
}

// Budget-balanced policy at the configured subsidy: the closed form at full
// subsidy, bisection on the tax otherwise.
policy::OptimalPolicyResult balanced_policy(policy::CarrierModel& model, const Config& c) {
    if (!c.subsidy || *c.subsidy >= 1.0 - 1e-12) return policy::optimal_policy(model, c.budget);
    policy::BisectionOptions opts;
    opts.bracket_hi = c.bracket_hi;
    opts.eps = c.eps;
    policy::BisectionResult r = policy::bisection_tax_search(model, *c.subsidy, c.budget, opts);
    if (!r.converged)
        throw InfeasibleError("tax search failed at subsidy " + num(*c.subsidy) + ": " +
                              r.failure);
    policy::OptimalPolicyResult out;
    out.policy = Policy{*c.subsidy, r.tax};
    out.outcome = std::move(r.outcome);
    return out;
}

// ---- shared CSV blocks --------------------------------------------------------------

const char* const kOutcomeColumns =
    "s,t,budget,avg_d,avg_f,avg_cost,realized_budget,modal_shift,n_vehicles,max_load";

void push_outcome_cells(std::vector<std::string>& row, const Policy& p, double budget_target,
                        const policy::PolicyOutcome& o) {
    row.push_back(num(p.subsidy));
    row.push_back(num(p.tax));
    row.push_back(num(budget_target));
    row.push_back(num(o.avg_distance));
    row.push_back(num(o.avg_flow));
    row.push_back(num(o.avg_cost));
    row.push_back(num(o.avg_realized_budget));
    row.push_back(num(o.modal_shift));
    row.push_back(num(o.avg_vehicles));
    row.push_back(num(o.avg_max_load));
}

const char* const kComparisonColumns =
    "base_avg_d,opt_avg_d,avg_d_change_pct,"
    "base_modal_shift,opt_modal_shift,base_modal_shift_demand,opt_modal_shift_demand,"
    "base_avg_cost,opt_avg_cost,avg_cost_change_pct,"
    "opt_subsidy,opt_tax,opt_realized_budget,"
    "base_n_vehicles,opt_n_vehicles,base_max_load,opt_max_load";

void push_comparison_cells(std::vector<std::string>& row, const policy::PolicyOutcome& base,
                           const policy::OptimalPolicyResult& opt) {
    const policy::PolicyOutcome& o = opt.outcome;
    row.push_back(num(base.avg_distance));
    row.push_back(num(o.avg_distance));
    row.push_back(num(pct_change(base.avg_distance, o.avg_distance)));
    row.push_back(num(base.modal_shift));
    row.push_back(num(o.modal_shift));
    row.push_back(num(base.modal_shift_demand));
    row.push_back(num(o.modal_shift_demand));
    row.push_back(num(base.avg_cost));
    row.push_back(num(o.avg_cost));
    row.push_back(num(pct_change(base.avg_cost, o.avg_cost)));
    row.push_back(num(opt.policy.subsidy));
    row.push_back(num(opt.policy.tax));
    row.push_back(num(o.avg_realized_budget));
    row.push_back(num(base.avg_vehicles));
    row.push_back(num(o.avg_vehicles));
    row.push_back(num(base.avg_max_load));
    row.push_back(num(o.avg_max_load));
}

// ---- commands ------------------------------------------------------------------------

int cmd_gen(Config c) {
    c.gen.seed = c.seed;
    instgen::ScenarioSet set = instgen::scenario_set(c.gen, c.scenarios);
    fs::create_directories(c.out_dir);
    const std::string fam = family_name(c.gen);
    json extra;
    extra["family"] = fam;
    extra["scenario_seeds"] = set.seeds;
    log_config(c, "gen", extra);
    for (std::size_t i = 0; i < set.instances.size(); ++i) {
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%02zu", i);
        const fs::path p = fs::path(c.out_dir) / (fam + "_" + idx + ".json");
        save_instance(set.instances[i], p.string());
    }
    std::cout << "gen: wrote " << set.instances.size() << " " << fam << " instance file(s) under "
              << c.out_dir << "\n";
    return exit_ok;
}

int cmd_compare(Config c) {
    std::vector<FamilyEntry> fams = c.families;
    if (fams.empty()) fams.push_back({family_name(c.gen), c.gen});

    std::string csv = std::string("family,scenarios,") + kComparisonColumns + "\n";
    json seed_log = json::array();
    for (std::size_t fi = 0; fi < fams.size(); ++fi) {
        instgen::GenSpec spec = fams[fi].spec;
        spec.seed = derive_seed(c.seed, fi, 0);
        instgen::ScenarioSet set = instgen::scenario_set(spec, c.scenarios);
        seed_log.push_back({{"family", fams[fi].name}, {"seeds", set.seeds}});

        auto model = model_for(c, std::move(set.instances));
        policy::PolicyOutcome base = policy::evaluate_policy(*model, Policy{0.0, 0.0});
        policy::OptimalPolicyResult opt = balanced_policy(*model, c);

        std::vector<std::string> row{csv_cell(fams[fi].name), std::to_string(c.scenarios)};
        push_comparison_cells(row, base, opt);
        csv += join_row(row);
    }
    fs::create_directories(c.out_dir);
    log_config(c, "compare", json{{"scenario_seeds", std::move(seed_log)}});
    write_text_file(fs::path(c.out_dir) / "compare.csv", csv);
    std::cout << "compare: " << fams.size() << " family(ies), " << c.scenarios
              << " scenario(s) -> " << (fs::path(c.out_dir) / "compare.csv").string() << "\n";
    return exit_ok;
}

int cmd_sensitivity(Config c) {
    instgen::GenSpec spec = c.gen;
    // The scatteredness axis rescales one fixed family, so generate it unscaled
    // and let the sweep apply the factor; k=1 then reproduces the base family
    // bit-exactly.
    if (c.axis == "scatteredness") spec.scatteredness_k = 1.0;
    spec.seed = c.seed;
    instgen::ScenarioSet base_set = instgen::scenario_set(spec, c.scenarios);

    std::string csv = std::string("axis,value,") + kOutcomeColumns + ",total_system_cost\n";
    std::string failures = "axis,value,error\n";
    int n_points = 0, n_failed = 0;

    auto run_point = [&](double value, std::vector<Instance> insts) {
        ++n_points;
        try {
            auto model = model_for(c, std::move(insts));
            policy::OptimalPolicyResult opt = balanced_policy(*model, c);
            std::vector<std::string> row{c.axis, num(value)};
            push_outcome_cells(row, opt.policy, c.budget, opt.outcome);
            row.push_back(num(opt.outcome.avg_cost + opt.outcome.avg_realized_budget));
            csv += join_row(row);
        } catch (const InfeasibleError& e) {
            // A sweep point may die (no feasible routing, budget unreachable);
            // record it and keep sweeping.
            ++n_failed;
            failures += join_row({c.axis, num(value), csv_cell(e.what())});
        }
    };

    if (c.axis == "scatteredness") {
        for (double k : c.k_grid) {
            std::vector<Instance> insts;
            insts.reserve(base_set.instances.size());
            for (const Instance& inst : base_set.instances)
                insts.push_back(instgen::apply_scatteredness(inst, k));
            run_point(k, std::move(insts));
        }
    } else {
        for (int fq : c.frequencies) {
            std::vector<Instance> insts;
            insts.reserve(base_set.instances.size());
            for (const Instance& inst : base_set.instances)
                insts.push_back(instgen::set_frequency(inst, fq));
            run_point(static_cast<double>(fq), std::move(insts));
        }
    }

    fs::create_directories(c.out_dir);
    log_config(c, "sensitivity", json{{"scenario_seeds", base_set.seeds}});
    write_text_file(fs::path(c.out_dir) / "sensitivity.csv", csv);
    write_text_file(fs::path(c.out_dir) / "sensitivity_failures.csv", failures);
    std::cout << "sensitivity: axis " << c.axis << ", " << n_points << " point(s), " << n_failed
              << " failed -> " << (fs::path(c.out_dir) / "sensitivity.csv").string() << "\n";
    return exit_ok;
}

int cmd_pareto(Config c) {
    instgen::GenSpec spec = c.gen;
    spec.seed = c.seed;
    instgen::ScenarioSet set = instgen::scenario_set(spec, c.scenarios);
    auto model = model_for(c, std::move(set.instances));

    // Budget targets are fractions of the average full-subsidy line spend.
    policy::PolicyOutcome full = policy::evaluate_policy(*model, Policy{1.0, 0.0});
    std::vector<double> budgets;
    budgets.reserve(c.budget_ratios.size());
    for (double r : c.budget_ratios) budgets.push_back(r * full.avg_flow);

    policy::BisectionOptions opts;
    opts.bracket_hi = c.bracket_hi;
    opts.eps = c.eps;
    policy::ParetoResult res = policy::pareto_sweep(*model, c.subsidy_grid, budgets, opts);

    std::string csv = std::string(kOutcomeColumns) + "\n";
    for (const policy::ParetoPoint& pt : res.points) {
        std::vector<std::string> row;
        push_outcome_cells(row, pt.outcome.policy, pt.budget_target, pt.outcome);
        csv += join_row(row);
    }
    std::string omitted = "s,budget,reason\n";
    for (const policy::OmittedPoint& om : res.omitted)
        omitted += join_row({num(om.subsidy), num(om.budget_target), csv_cell(om.reason)});

    fs::create_directories(c.out_dir);
    log_config(c, "pareto",
               json{{"scenario_seeds", set.seeds},
                    {"avg_f_full", full.avg_flow},
                    {"budgets", budgets}});
    write_text_file(fs::path(c.out_dir) / "pareto.csv", csv);
    write_text_file(fs::path(c.out_dir) / "pareto_omitted.csv", omitted);
    std::cout << "pareto: " << res.points.size() << " point(s), " << res.omitted.size()
              << " omitted -> " << (fs::path(c.out_dir) / "pareto.csv").string() << "\n";
    return exit_ok;
}

int cmd_verify(Config c) {
    std::string csv = "set,label,phi,n_alts,trials,samples,violations\n";
    std::string details = "set,check,message\n";
    long long total_violations = 0;

    auto run_set = [&](int idx, const std::string& label,
                       const std::vector<oracle::Alternative>& alts, double phi) {
        policy::PropositionOptions opt;
        opt.min_feasible_trials = c.verify_trials;
        opt.seed = derive_seed(c.seed, 11, static_cast<std::uint64_t>(idx));
        opt.negative_control = c.negative_control;
        policy::PropositionReport rep = policy::verify_propositions(alts, phi, opt);
        csv += join_row({std::to_string(idx), label, num(phi), std::to_string(alts.size()),
                         std::to_string(rep.trials), std::to_string(rep.samples_drawn),
                         std::to_string(rep.violations.size())});
        for (const policy::PropViolation& v : rep.violations)
            details += join_row({std::to_string(idx), v.check, csv_cell(v.message)});
        total_violations += static_cast<long long>(rep.violations.size());
    };

    // The worked two-alternative set first, then the random batch.
    run_set(0, "example-1", {{15.0, 20.0}, {20.0, 5.0}}, 1.0);
    Rng shape(c.seed);
    for (int i = 1; i <= c.verify_sets; ++i) {
        const int n_alts = shape.next_int(3, 8);
        const double phi = shape.next_real(0.25, 2.0);
        Rng set_rng(derive_seed(c.seed, 12, static_cast<std::uint64_t>(i)));
        run_set(i, "random", policy::random_nondominated_set(n_alts, set_rng), phi);
    }

    fs::create_directories(c.out_dir);
    log_config(c, "verify");
    write_text_file(fs::path(c.out_dir) / "verify.csv", csv);
    write_text_file(fs::path(c.out_dir) / "verify_violations.csv", details);
    std::cout << "verify: " << (1 + c.verify_sets) << " set(s), " << total_violations
              << " violation(s) -> " << (fs::path(c.out_dir) / "verify.csv").string() << "\n";
    return total_violations == 0 ? exit_ok : exit_violation;
}

int cmd_berlin(Config c) {
    ingest::LocationPool pool = ingest::parse_pool(c.pool_path);
    ingest::SbahnConfig line_cfg = ingest::load_sbahn_config(c.sbahn_path);

    std::string csv = std::string("tariff,scenarios,") + kComparisonColumns + "\n";
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < c.scenarios; ++i) seeds.push_back(c.seed + static_cast<std::uint64_t>(i));

    for (double tariff : c.tariffs) {
        // The same scenario seeds recur for every tariff so the rows differ
        // only in the fare level.
        std::vector<Instance> insts;
        insts.reserve(seeds.size());
        for (std::uint64_t s : seeds) {
            ingest::CaseParams p = c.case_params;
            p.seed = s;
            p.tariff_override = tariff;
            insts.push_back(ingest::sample_case(pool, line_cfg, p));
        }
        auto model = model_for(c, std::move(insts));
        policy::PolicyOutcome base = policy::evaluate_policy(*model, Policy{0.0, 0.0});
        policy::OptimalPolicyResult opt = balanced_policy(*model, c);

        std::vector<std::string> row{num(tariff), std::to_string(c.scenarios)};
        push_comparison_cells(row, base, opt);
        csv += join_row(row);
    }

    fs::create_directories(c.out_dir);
    log_config(c, "berlin", json{{"scenario_seeds", seeds}});
    write_text_file(fs::path(c.out_dir) / "berlin.csv", csv);
    std::cout << "berlin: " << c.tariffs.size() << " tariff(s), " << c.scenarios
              << " scenario(s) -> " << (fs::path(c.out_dir) / "berlin.csv").string() << "\n";
    return exit_ok;
}

void add_common(CLI::App* s, Flags& f) {
    s->add_option("--config", f.config, "JSON settings file (flags override it)");
    s->add_option("--seed", f.seed, "master seed");
    s->add_option("--scenarios", f.scenarios, "scenario count");
    s->add_option("--out", f.out, "output directory");
    s->add_option("--solver", f.solver, "lower-level solver")
        ->check(CLI::IsMember({"alns", "oracle"}));
    s->add_option("--budget", f.budget, "public budget target");
    s->add_option("--subsidy", f.subsidy, "fix the subsidy and balance by tax bisection")
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--eps", f.eps, "budget tolerance (-1 = auto)");
    s->add_option("--max-iter", f.max_iter, "search iterations");
}

void add_genspec(CLI::App* s, Flags& f) {
    s->add_option("--requests", f.requests, "orders per instance");
    s->add_option("--stations", f.stations, "stations on the line");
    s->add_option("--vehicles", f.vehicles, "fleet size (0 = derived)");
    s->add_option("--frequency", f.frequency, "departures per hour");
    s->add_option("--scatteredness", f.scatteredness, "order scatteredness factor k");
    s->add_option("--geography", f.geography, "station layout")
        ->check(CLI::IsMember({"intercity", "metro", "metropolitan"}));
    s->add_option("--allocation", f.allocation, "pickup/delivery station pairing")
        ->check(CLI::IsMember({"different", "random"}));
    s->add_option("--tw", f.tw_class, "time-window class")
        ->check(CLI::IsMember({"tight", "wide"}));
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"road-tax and scheduled-line-subsidy experiments over a PDPTW-SL carrier"};
    app.name("mshift");
    app.require_subcommand(1);

    Flags f;
    CLI::App* gen = app.add_subcommand("gen", "write synthetic instance files");
    CLI::App* compare = app.add_subcommand("compare", "base versus budget-balanced policy");
    CLI::App* sensitivity =
        app.add_subcommand("sensitivity", "sweep order scatteredness or train frequency");
    CLI::App* pareto = app.add_subcommand("pareto", "subsidy x budget frontier sweep");
    CLI::App* verify =
        app.add_subcommand("verify", "structural property checks on finite alternative sets");
    CLI::App* berlin = app.add_subcommand("berlin", "pool-sampled case across tariff presets");

    for (CLI::App* s : {gen, compare, sensitivity, pareto, verify, berlin}) add_common(s, f);
    for (CLI::App* s : {gen, compare, sensitivity, pareto}) add_genspec(s, f);

    sensitivity->add_option("--axis", f.axis, "sweep axis")
        ->check(CLI::IsMember({"scatteredness", "frequency"}));
    verify->add_option("--sets", f.sets, "random alternative sets");
    verify->add_option("--trials", f.trials, "budget-feasible policy pairs per set");
    verify->add_flag("--negative-control", f.negative_control,
                     "corrupt the responses; the checks must then report violations");
    berlin->add_option("--pool", f.pool, "location pool file");
    berlin->add_option("--sbahn", f.sbahn, "line network JSON");
    berlin->add_option("--requests", f.case_requests, "orders per sampled case");
    berlin->add_option("--tariffs", f.tariffs, "tariff presets to tabulate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        Config c;
        if (f.config) apply_config_file(c, *f.config);
        apply_flags(c, f);
        validate_config(c);
        if (app.got_subcommand(gen)) return cmd_gen(std::move(c));
        if (app.got_subcommand(compare)) return cmd_compare(std::move(c));
        if (app.got_subcommand(sensitivity)) return cmd_sensitivity(std::move(c));
        if (app.got_subcommand(pareto)) return cmd_pareto(std::move(c));
        if (app.got_subcommand(verify)) return cmd_verify(std::move(c));
        return cmd_berlin(std::move(c));
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const InvalidInstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace mshift::cli
