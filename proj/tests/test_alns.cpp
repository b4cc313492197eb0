#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"

#include "mshift/alns.hpp"
#include "mshift/errors.hpp"
#include "mshift/json_io.hpp"
#include "mshift/objective.hpp"
#include "mshift/oracle.hpp"
#include "mshift/rng.hpp"
#include "mshift/validate.hpp"

#include "helpers.hpp"

using namespace mshift;
using namespace mshift::alns;

namespace {

AlnsParams quick_params(std::uint64_t seed = 1, int iters = 2000) {
    AlnsParams p;
    p.seed = seed;
    p.max_iterations = iters;
    return p;
}

} // namespace

TEST_CASE("solve handles an instance with no requests") {
    Instance inst;
    inst.nodes = {{1, 0.0, 0.0, NodeKind::Depot}};
    inst.fleet = {1, 10.0, 1.0};
    inst.phi = 1.0;
    inst.horizon = {0.0, 100.0};
    inst.finalize();

    const SolverRun run = solve(inst, Policy{0.0, 0.0}, quick_params());
    CHECK(run.best_cost == 0.0);
    CHECK(run.best.total_distance == 0.0);
    CHECK(validate_solution(inst, run.best).ok());
}

TEST_CASE("same seed gives byte-identical results") {
    const Instance inst = testutil::three_request_mix();
    const Policy p{0.5, 0.2};
    const SolverRun a = solve(inst, p, quick_params(42, 1000));
    const SolverRun b = solve(inst, p, quick_params(42, 1000));
    CHECK(a.best_cost == b.best_cost);
    CHECK(solution_to_json(a.best) == solution_to_json(b.best));
}

TEST_CASE("reported cost matches the objective of the returned solution") {
    const Instance inst = testutil::three_request_mix();
    for (const Policy p : {Policy{0.0, 0.0}, Policy{1.0, 0.0}, Policy{0.5, 0.4}}) {
        const SolverRun run = solve(inst, p, quick_params(7, 1500));
        CHECK(validate_solution(inst, run.best).ok());
        CHECK(run.best_cost ==
              doctest::Approx(evaluate_objective(inst, p, run.best)).epsilon(1e-12));
    }
}

TEST_CASE("full subsidy reduces the objective to taxed road cost") {
    const Instance inst = testutil::two_leg_choice();
    const Policy p{1.0, 0.0};
    const SolverRun run = solve(inst, p, quick_params(3, 1500));
    CHECK(run.best_cost == doctest::Approx(inst.phi * run.best.total_distance).epsilon(1e-12));
}

TEST_CASE("search matches the exhaustive solver on the fixtures") {
    struct Case {
        Instance inst;
        std::vector<Policy> policies;
    };
    const std::vector<Case> cases = {
        {testutil::two_leg_choice(), {{0.0, 0.0}, {0.5, 2.0 / 3.0}, {0.6, 0.15}}},
        {testutil::line_shift_tiny(), {{0.0, 0.0}, {1.0, 0.0}}},
        {testutil::three_request_mix(), {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.4}}},
    };
    for (const auto& c : cases) {
        for (const Policy& p : c.policies) {
            const Solution exact = oracle::enumerate_optimal(c.inst, p);
            const double exact_cost = evaluate_objective(c.inst, p, exact);
            const SolverRun run = solve(c.inst, p, quick_params(11, 2500));
            CHECK(validate_solution(c.inst, run.best).ok());
            // never better than the exhaustive optimum, and should reach it here
            CHECK(run.best_cost >= exact_cost - 1e-9);
            CHECK(run.best_cost == doctest::Approx(exact_cost).epsilon(1e-9));
        }
    }
}

TEST_CASE("warm start never loses ground") {
    const Instance inst = testutil::three_request_mix();
    const Policy p{0.4, 0.1};
    const SolverRun cold = solve(inst, p, quick_params(5, 400));
    const SolverRun warm = solve(inst, p, quick_params(99, 400), &cold.best);
    CHECK(warm.best_cost <= cold.best_cost + 1e-9);
    CHECK(validate_solution(inst, warm.best).ok());

    // the stored solution reconstructs to the same cost
    const Plan plan = plan_from_solution(inst, cold.best);
    CHECK(plan.cost(p) == doctest::Approx(cold.best_cost).epsilon(1e-9));
}

TEST_CASE("validate_each_accept stays clean over a full run") {
    const Instance inst = testutil::three_request_mix();
    AlnsParams params = quick_params(13, 800);
    params.validate_each_accept = true;
    SolverRun run;
    CHECK_NOTHROW(run = solve(inst, Policy{0.6, 0.3}, params));
    CHECK(validate_solution(inst, run.best).ok());
}

TEST_CASE("trace shows a monotone incumbent") {
    const Instance inst = testutil::three_request_mix();
    AlnsParams params = quick_params(21, 1000);
    params.keep_trace = true;
    const SolverRun run = solve(inst, Policy{0.3, 0.1}, params);
    REQUIRE(!run.trace.empty());
    double prev = run.trace.front().best_cost;
    for (const TraceRow& row : run.trace) {
        CHECK(row.best_cost <= prev + 1e-12);
        prev = row.best_cost;
        CHECK(row.destroy_op >= 0);
        CHECK(row.destroy_op < 4);
        CHECK(row.repair_op >= 0);
        CHECK(row.repair_op < 2);
    }
    CHECK(run.trace.back().best_cost == doctest::Approx(run.best_cost).epsilon(1e-12));
}

TEST_CASE("destroy operators remove what they claim") {
    const Instance inst = testutil::three_request_mix();
    const Policy p{0.0, 0.0};
    Rng rng(17);
    Plan plan = construct_initial(inst, p, rng);
    REQUIRE(plan.n_served() == 3);

    SUBCASE("k = 0 is a no-op") {
        Plan copy = plan;
        CHECK(destroy_random(copy, 0, rng).empty());
        CHECK(copy.n_served() == 3);
    }

    SUBCASE("oversized k empties the plan") {
        Plan copy = plan;
        const auto removed = destroy_random(copy, 99, rng);
        CHECK(removed.size() == 3);
        CHECK(copy.n_served() == 0);
        for (const auto& m : copy.modes) CHECK(m.kind == ModeKind::Unserved);
        CHECK(copy.total_flow == 0.0);
    }

    SUBCASE("destroy_worst takes the biggest saving first") {
        int brute_pick = -1;
        double brute_best = -1e300;
        for (int r = 0; r < 3; ++r) {
            Plan probe = plan;
            remove_request(probe, r);
            const double saving = plan.cost(p) - probe.cost(p);
            if (saving > brute_best) {
                brute_best = saving;
                brute_pick = r;
            }
        }
        Plan copy = plan;
        const auto removed = destroy_worst(copy, 1, p, rng);
        REQUIRE(removed.size() == 1);
        CHECK(removed[0] == brute_pick);
    }

    SUBCASE("destroy_related and destroy_sl_focused stay within the served set") {
        Plan copy = plan;
        const auto removed = destroy_related(copy, 2, rng);
        CHECK(removed.size() == 2);
        CHECK(copy.n_served() == 1);
        Plan copy2 = plan;
        const auto removed2 = destroy_sl_focused(copy2, 2, rng);
        CHECK(removed2.size() == 2);
        CHECK(copy2.n_served() == 1);
    }
}

TEST_CASE("repair on an empty removal list changes nothing") {
    const Instance inst = testutil::three_request_mix();
    const Policy p{0.2, 0.1};
    Rng rng(3);
    Plan plan = construct_initial(inst, p, rng);
    const double before = plan.cost(p);
    CHECK(repair_greedy(plan, {}, p));
    CHECK(plan.cost(p) == before);
    CHECK(repair_regret2(plan, {}, p));
    CHECK(plan.cost(p) == before);
}

TEST_CASE("repairs restore a fully destroyed plan") {
    const Instance inst = testutil::three_request_mix();
    const Policy p{1.0, 0.0};
    Rng rng(29);
    Plan plan = construct_initial(inst, p, rng);
    Plan greedy = plan;
    auto removed = destroy_random(greedy, 3, rng);
    REQUIRE(greedy.n_served() == 0);
    CHECK(repair_greedy(greedy, removed, p));
    CHECK(greedy.n_served() == 3);
    CHECK(validate_solution(inst, plan_to_solution(greedy)).ok());

    Plan regret = plan;
    removed = destroy_random(regret, 3, rng);
    CHECK(repair_regret2(regret, removed, p));
    CHECK(regret.n_served() == 3);
    CHECK(validate_solution(inst, plan_to_solution(regret)).ok());
}

TEST_CASE("scheduled insertions only use reachable departures") {
    Instance inst = testutil::line_shift_tiny();
    // a departure that leaves before any feeder could possibly arrive
    inst.legs[0].departures.insert(inst.legs[0].departures.begin(), 4.0);
    inst.finalize();
    const Plan plan = empty_plan(inst);
    const auto cands = sl_insertion_candidates(plan, 0, Policy{1.0, 0.0});
    REQUIRE(!cands.empty());
    for (const Insertion& c : cands) {
        CHECK(c.kind == ModeKind::Scheduled);
        CHECK(c.leg == 0);
        CHECK(c.departure >= 1); // index 0 departs at t=4, unreachable
    }
}

TEST_CASE("scheduled insertions vanish when the delivery window closes") {
    Instance inst = testutil::line_shift_tiny();
    inst.requests[0].delivery_tw = {0.0, 20.0}; // direct arrives at 14, any ride at 30+
    inst.finalize();
    const Plan plan = empty_plan(inst);
    CHECK(sl_insertion_candidates(plan, 0, Policy{1.0, 0.0}).empty());
    const auto best = best_insertion(plan, 0, Policy{1.0, 0.0});
    REQUIRE(best.has_value());
    CHECK(best->kind == ModeKind::Direct);
}

TEST_CASE("scheduled insertions respect booked departure capacity") {
    const Instance inst = testutil::three_request_mix(); // demands 8/6/4, capacity 10
    const Policy p{1.0, 0.0};
    Plan plan = empty_plan(inst);
    const auto first = sl_insertion_candidates(plan, 0, p);
    REQUIRE(!first.empty());
    const Insertion* pick = &first[0];
    for (const Insertion& c : first)
        if (c.delta_cost < pick->delta_cost) pick = &c;
    apply_insertion(plan, 0, *pick);
    REQUIRE(plan.modes[0].kind == ModeKind::Scheduled);
    const int taken = plan.modes[0].departure;

    // 8 on board: neither 6 nor 4 fits the same departure
    for (int req : {1, 2}) {
        for (const Insertion& c : sl_insertion_candidates(plan, req, p)) {
            CHECK(c.departure != taken);
        }
    }
}

TEST_CASE("annealing acceptance edge cases") {
    Rng rng(1);
    CHECK(accept(5.0, 5.0, 0.0, rng));
    CHECK(accept(4.0, 5.0, 0.0, rng));
    CHECK_FALSE(accept(5.0 + 1e-9, 5.0, 0.0, rng));
    int yes = 0;
    for (int i = 0; i < 200; ++i)
        if (accept(6.0, 5.0, 1e9, rng)) ++yes;
    CHECK(yes > 150); // near-certain acceptance at huge temperature
}

TEST_CASE("weight update only touches used operators") {
    std::vector<double> w = {1.0, 2.0, 3.0};
    const std::vector<double> scores = {33.0, 0.0, 10.0};
    const std::vector<int> uses = {1, 0, 4};

    std::vector<double> frozen = w;
    update_weights(frozen, scores, uses, 0.0);
    CHECK(frozen == w);

    std::vector<double> blended = w;
    update_weights(blended, scores, uses, 0.5);
    CHECK(blended[0] == doctest::Approx(0.5 * 1.0 + 0.5 * 33.0));
    CHECK(blended[1] == 2.0);
    CHECK(blended[2] == doctest::Approx(0.5 * 3.0 + 0.5 * 10.0 / 4.0));

    std::vector<double> replaced = w;
    update_weights(replaced, scores, uses, 1.0);
    CHECK(replaced[0] == doctest::Approx(33.0));
    CHECK(replaced[2] == doctest::Approx(2.5));
}
