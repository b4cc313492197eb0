// Acceptance checks, one per release criterion. Each check prints a single
// PASS/FAIL line; run with no arguments for all of them or pass criterion
// numbers to select a subset. Exit code 0 only when every selected check
// passes. Tolerances are pinned here, next to the checks they guard.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mshift/alns.hpp"
#include "mshift/errors.hpp"
#include "mshift/ingest.hpp"
#include "mshift/instgen.hpp"
#include "mshift/json_io.hpp"
#include "mshift/objective.hpp"
#include "mshift/oracle.hpp"
#include "mshift/policy.hpp"
#include "mshift/rng.hpp"
#include "mshift/validate.hpp"

#include "helpers.hpp"

using namespace mshift;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// ---- 1: worked two-alternative selection with balanced budgets ---------------

bool crit_two_alternative_argmin(std::string& why) {
    const std::vector<oracle::Alternative> alts = testutil::two_alternatives();
    const double phi = 1.0;

    struct Expect {
        Policy p;
        int index;
        double cost;
    };
    const std::vector<Expect> cases = {
        {{0.5, 2.0 / 3.0}, 0, 35.0},
        {{0.6, 0.15}, 1, 25.0},
    };
    for (const Expect& e : cases) {
        const auto r = oracle::finite_argmin(alts, phi, e.p);
        if (r.index != e.index) {
            why = "picked alternative " + std::to_string(r.index) + " at s=" + fmt(e.p.subsidy) +
                  " t=" + fmt(e.p.tax) + ", expected " + std::to_string(e.index);
            return false;
        }
        if (std::abs(r.cost - e.cost) > 1e-12) {
            why = "cost " + fmt(r.cost) + " differs from " + fmt(e.cost);
            return false;
        }
        const auto& alt = alts[static_cast<std::size_t>(r.index)];
        const double budget = realized_budget(phi, e.p, alt.distance, alt.flow_cost);
        if (std::abs(budget) > 1e-12) {
            why = "realized budget " + fmt(budget) + " not balanced at s=" + fmt(e.p.subsidy);
            return false;
        }
    }
    return true;
}

// ---- 2: structural property suite over finite sets ---------------------------

bool crit_property_suite(std::string& why) {
    policy::PropositionOptions opt;
    opt.min_feasible_trials = 1000;
    opt.seed = 1;
    policy::PropositionReport rep = policy::verify_propositions(testutil::two_alternatives(), 1.0, opt);
    if (!rep.ok()) {
        why = "worked example set: " + rep.violations.front().check + ": " +
              rep.violations.front().message;
        return false;
    }

    const std::uint64_t master = 20240517;
    for (int i = 0; i < 1000; ++i) {
        Rng shape(derive_seed(master, 3, static_cast<std::uint64_t>(i)));
        const int n_alts = shape.next_int(3, 8);
        const double phi = shape.next_real(0.25, 2.0);
        const auto alts = policy::random_nondominated_set(n_alts, shape);

        policy::PropositionOptions o;
        o.min_feasible_trials = 1000;
        o.seed = derive_seed(master, 4, static_cast<std::uint64_t>(i));
        rep = policy::verify_propositions(alts, phi, o);
        if (!rep.ok()) {
            why = "set " + std::to_string(i) + " (" + std::to_string(n_alts) +
                  " alternatives, phi=" + fmt(phi) + "): " + rep.violations.front().check + ": " +
                  rep.violations.front().message;
            return false;
        }
        if (rep.trials < 1000) {
            why = "set " + std::to_string(i) + " only reached " + std::to_string(rep.trials) +
                  " feasible trials";
            return false;
        }
    }
    return true;
}

// ---- 3: heuristic matches the exhaustive solver on tiny instances ------------

bool crit_search_vs_exhaustive(std::string& why) {
    const std::vector<Policy> policies = {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.4}};
    int runs = 0, hits = 0;
    for (int i = 0; i < 100; ++i) {
        instgen::GenSpec spec;
        spec.geography = instgen::Geography::Intercity;
        spec.allocation = instgen::Allocation::Random;
        spec.tw_class = instgen::TwClass::Wide;
        spec.n_requests = 2 + (i % 3); // 2..4
        spec.n_stations = 2;           // two directed legs
        spec.n_vehicles = 2;
        spec.frequency_per_hour = 1; // keeps the exhaustive pass quick
        spec.seed = 1000 + static_cast<std::uint64_t>(i);
        const Instance inst = instgen::generate(spec);

        for (const Policy& p : policies) {
            const Solution exact = oracle::enumerate_optimal(inst, p);
            const double exact_cost = evaluate_objective(inst, p, exact);

            const alns::AlnsParams params; // defaults: 5000 iterations
            const alns::SolverRun run = alns::solve(inst, p, params);
            if (!validate_solution(inst, run.best).ok()) {
                why = "instance " + std::to_string(i) + ": heuristic returned an invalid solution";
                return false;
            }
            if (run.best_cost < exact_cost - 1e-9) {
                why = "instance " + std::to_string(i) + " s=" + fmt(p.subsidy) +
                      " t=" + fmt(p.tax) + ": heuristic cost " + fmt(run.best_cost) +
                      " beats the exhaustive optimum " + fmt(exact_cost);
                return false;
            }
            ++runs;
            const double rel = (run.best_cost - exact_cost) / std::max(1.0, std::abs(exact_cost));
            if (rel <= 1e-9) ++hits;
        }
    }
    if (hits * 20 < runs * 19) { // at least 95%
        why = "optimum reached in only " + std::to_string(hits) + " of " + std::to_string(runs) +
              " runs";
        return false;
    }
    return true;
}

// ---- 4: closed-form budget attainment ----------------------------------------

bool crit_budget_attainment(std::string& why) {
    policy::SolverConfig cfg;
    cfg.kind = policy::SolverKind::Exact;
    auto model = policy::make_instance_model(
        {testutil::two_leg_choice(), testutil::line_shift_tiny(2.0, 0.0),
         testutil::line_shift_tiny(1.7, 0.0)},
        cfg);

    const double f_full = policy::evaluate_policy(*model, Policy{1.0, 0.0}).avg_flow;
    if (f_full <= 0.0) {
        why = "full-subsidy flow " + fmt(f_full) + " is not positive";
        return false;
    }
    for (const double ratio : {0.0, 0.25, 0.5, 1.0}) {
        const double budget = ratio * f_full;
        const policy::OptimalPolicyResult r = policy::optimal_policy(*model, budget);
        const double err = std::abs(r.outcome.avg_realized_budget - budget);
        if (err > 1e-9) {
            why = "budget " + fmt(budget) + ": realized " + fmt(r.outcome.avg_realized_budget) +
                  " misses by " + fmt(err);
            return false;
        }
        if (r.policy.subsidy != 1.0 || r.policy.tax < 0.0) {
            why = "budget " + fmt(budget) + ": unexpected policy s=" + fmt(r.policy.subsidy) +
                  " t=" + fmt(r.policy.tax);
            return false;
        }
    }
    try {
        (void)policy::optimal_policy(*model, 1.01 * f_full);
        why = "budget above the full-subsidy flow was accepted";
        return false;
    } catch (const InfeasibleError&) {
    }
    return true;
}

// ---- 5: tax bisection convergence ---------------------------------------------

bool crit_bisection_convergence(std::string& why) {
    // routing cannot change: one alternative (d, f) = (100, 40), phi = 1
    auto model = policy::make_finite_model({oracle::Alternative{100.0, 40.0}}, 1.0);
    policy::BisectionOptions opts;
    opts.bracket_lo = 0.0;
    opts.bracket_hi = 1.0;
    // the criterion pins the tax accuracy; the gap slope is phi*d = 100, so a
    // 1e-7 money tolerance forces |t - 0.3| below 1e-9, well inside 1e-6
    opts.eps = 1e-7;
    opts.max_iterations = 40;
    const policy::BisectionResult res = policy::bisection_tax_search(*model, 1.0, 10.0, opts);
    if (!res.converged) {
        why = "did not converge: " + res.failure;
        return false;
    }
    if (res.iterations > 40) {
        why = "took " + std::to_string(res.iterations) + " iterations";
        return false;
    }
    if (std::abs(res.tax - 0.3) > 1e-6) {
        why = "tax " + fmt(res.tax) + " not within 1e-6 of 0.3";
        return false;
    }
    if (res.steps.empty()) {
        why = "no bisection steps recorded";
        return false;
    }
    for (std::size_t k = 0; k < res.steps.size(); ++k) {
        const auto& s = res.steps[k];
        if (s.gap_lo * s.gap_hi > 0.0) {
            why = "sign invariant broken at step " + std::to_string(k) + ": gap_lo=" +
                  fmt(s.gap_lo) + " gap_hi=" + fmt(s.gap_hi);
            return false;
        }
        if (!(s.lo <= s.mid && s.mid <= s.hi)) {
            why = "midpoint left the bracket at step " + std::to_string(k);
            return false;
        }
    }
    return true;
}

// ---- 6: budget-plus-cost invariance at full subsidy ---------------------------

bool crit_cost_transfer(std::string& why) {
    for (int j = 0; j < 10; ++j) {
        policy::SolverConfig cfg;
        cfg.kind = policy::SolverKind::Exact;
        auto model = policy::make_instance_model(
            {testutil::line_shift_tiny(1.8 + 0.1 * j, 0.0),
             testutil::line_shift_tiny(2.0 + 0.05 * j, 0.1 + 0.05 * j)},
            cfg);

        const policy::PolicyOutcome full = policy::evaluate_policy(*model, Policy{1.0, 0.0});
        const double f_full = full.avg_flow;
        const double road_plus_flow = full.avg_distance * 1.0 + f_full; // phi = 1

        double lo = 1e300, hi = -1e300;
        for (const double ratio : {0.0, 0.25, 0.5}) {
            const double budget = ratio * f_full;
            const policy::OptimalPolicyResult r = policy::optimal_policy(*model, budget);
            const double total = budget + r.outcome.avg_cost;
            lo = std::min(lo, total);
            hi = std::max(hi, total);
            if (std::abs(total - road_plus_flow) > 1e-9) {
                why = "set " + std::to_string(j) + ", budget " + fmt(budget) +
                      ": budget+cost " + fmt(total) + " differs from road+flow " +
                      fmt(road_plus_flow);
                return false;
            }
        }
        if (hi - lo > 1e-9) {
            why = "set " + std::to_string(j) + ": budget+cost varies by " + fmt(hi - lo);
            return false;
        }
    }
    return true;
}

// ---- 7: policy direction on generated families --------------------------------

bool crit_policy_direction(std::string& why) {
    int good = 0;
    std::string detail;
    for (int rep = 0; rep < 10; ++rep) {
        instgen::GenSpec spec;
        spec.geography = instgen::Geography::Intercity;
        spec.allocation = instgen::Allocation::Different;
        spec.tw_class = instgen::TwClass::Wide;
        spec.n_requests = 25;
        spec.n_stations = 2;
        spec.frequency_per_hour = 1;
        spec.seed = 100 + static_cast<std::uint64_t>(rep);
        const instgen::ScenarioSet set = instgen::scenario_set(spec, 10);

        policy::SolverConfig cfg;
        cfg.kind = policy::SolverKind::Alns;
        cfg.alns.max_iterations = 800;
        cfg.seed = derive_seed(9000, 1, static_cast<std::uint64_t>(rep));
        auto model = policy::make_instance_model(set.instances, cfg);

        const policy::PolicyOutcome base = policy::evaluate_policy(*model, Policy{0.0, 0.0});
        const policy::OptimalPolicyResult opt = policy::optimal_policy(*model, 0.0);

        const bool dist_down = opt.outcome.avg_distance < base.avg_distance;
        const bool shift_up = opt.outcome.modal_shift > base.modal_shift;
        const bool cost_up = opt.outcome.avg_cost > base.avg_cost;
        if (dist_down && shift_up && cost_up) {
            ++good;
        } else {
            detail += " rep " + std::to_string(rep) + " (d " + fmt(base.avg_distance) + "->" +
                      fmt(opt.outcome.avg_distance) + ", shift " + fmt(base.modal_shift) + "->" +
                      fmt(opt.outcome.modal_shift) + ", cost " + fmt(base.avg_cost) + "->" +
                      fmt(opt.outcome.avg_cost) + ")";
        }
    }
    if (good < 9) {
        why = "direction held in only " + std::to_string(good) + " of 10 repetitions:" + detail;
        return false;
    }
    return true;
}

// ---- 8: frequency sweep direction ----------------------------------------------

bool crit_frequency_direction(std::string& why) {
    double shift_sparse = 0.0, shift_dense = 0.0;
    const int n_sets = 12;
    for (int i = 0; i < n_sets; ++i) {
        instgen::GenSpec spec;
        spec.n_requests = 3;
        spec.n_stations = 2;
        spec.n_vehicles = 2;
        spec.frequency_per_hour = 1;
        spec.seed = 4000 + static_cast<std::uint64_t>(i);
        const Instance sparse = instgen::generate(spec);
        const Instance dense = instgen::set_frequency(sparse, 10);

        policy::SolverConfig cfg;
        cfg.kind = policy::SolverKind::Exact;
        for (const auto* variant : {&sparse, &dense}) {
            auto model = policy::make_instance_model({*variant}, cfg);
            const policy::OptimalPolicyResult r = policy::optimal_policy(*model, 0.0);
            (variant == &sparse ? shift_sparse : shift_dense) += r.outcome.modal_shift;
        }
    }
    shift_sparse /= n_sets;
    shift_dense /= n_sets;
    if (shift_dense + 1e-12 < shift_sparse) {
        why = "mean modal shift fell from " + fmt(shift_sparse) + " (1/h) to " +
              fmt(shift_dense) + " (10/h)";
        return false;
    }
    return true;
}

// ---- 9: format round-trip stability --------------------------------------------

bool crit_format_round_trip(std::string& why) {
    instgen::GenSpec spec;
    spec.n_requests = 8;
    spec.seed = 77;
    const std::vector<Instance> cases = {testutil::two_leg_choice(),
                                         testutil::line_shift_tiny(1.7, 0.3),
                                         instgen::generate(spec)};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const std::string once = instance_to_json(cases[i]);
        const std::string twice = instance_to_json(instance_from_json(once));
        if (once != twice) {
            why = "instance " + std::to_string(i) + ": reserialization changed the bytes";
            return false;
        }
    }

    const std::string pool_text = "n=3\n"
                                  "11 0 0\n"
                                  "12 3 0\n"
                                  "13 0 4\n"
                                  "0 3.25 5\n"
                                  "3.25 0 6\n"
                                  "5 6 0\n";
    const std::string once = ingest::pool_to_text(ingest::parse_pool_text(pool_text, "mem"));
    const std::string twice = ingest::pool_to_text(ingest::parse_pool_text(once, "mem"));
    if (once != twice) {
        why = "pool text: print -> parse -> print is not a fixed point";
        return false;
    }

    struct BadCase {
        const char* label;
        const char* text;
        const char* want; // substring the error must carry
    };
    const std::vector<BadCase> bad_instances = {
        {"truncated json", "{", ""},
        {"missing key", R"({"requests": []})", "missing key"},
    };
    for (const BadCase& b : bad_instances) {
        try {
            (void)instance_from_json(b.text);
            why = std::string(b.label) + ": accepted";
            return false;
        } catch (const ParseError& e) {
            if (std::string(e.what()).find(b.want) == std::string::npos) {
                why = std::string(b.label) + ": error lacks `" + b.want + "`: " + e.what();
                return false;
            }
        }
    }
    const std::vector<BadCase> bad_pools = {
        {"bad header", "m=2\n", "pool.txt:1"},
        {"short matrix", "n=2\n1 0 0\n2 1 1\n0 1 1\n", "ends early"},
        {"nonzero diagonal", "n=2\n1 0 0\n2 1 1\n0.5 1\n1 0\n", "pool.txt:4"},
    };
    for (const BadCase& b : bad_pools) {
        try {
            (void)ingest::parse_pool_text(b.text, "pool.txt");
            why = std::string(b.label) + ": accepted";
            return false;
        } catch (const ParseError& e) {
            if (std::string(e.what()).find(b.want) == std::string::npos) {
                why = std::string(b.label) + ": error lacks `" + b.want + "`: " + e.what();
                return false;
            }
        }
    }
    return true;
}

struct Criterion {
    int number;
    const char* name;
    bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "two-alternative argmin and balanced budgets", crit_two_alternative_argmin},
    {2, "structural property suite on finite sets", crit_property_suite},
    {3, "search matches the exhaustive solver on tiny instances", crit_search_vs_exhaustive},
    {4, "closed-form budget attainment", crit_budget_attainment},
    {5, "tax bisection convergence", crit_bisection_convergence},
    {6, "budget-plus-cost invariance at full subsidy", crit_cost_transfer},
    {7, "policy direction on generated families", crit_policy_direction},
    {8, "frequency sweep direction", crit_frequency_direction},
    {9, "format round-trip stability", crit_format_round_trip},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > 9) {
            std::fprintf(stderr, "usage: %s [criterion numbers 1..9]\n", argv[0]);
            return 2;
        }
        selected.insert(k);
    }

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && !selected.count(c.number)) continue;
        std::string why;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.fn(why);
        } catch (const std::exception& e) {
            why = std::string("unexpected exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok) {
            std::printf("PASS %d: %s [%.1fs]\n", c.number, c.name, secs);
        } else {
            std::printf("FAIL %d: %s (%s) [%.1fs]\n", c.number, c.name, why.c_str(), secs);
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
