#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"

#include "mshift/errors.hpp"
#include "mshift/objective.hpp"
#include "mshift/rng.hpp"
#include "mshift/schedule.hpp"
#include "mshift/solution.hpp"
#include "mshift/types.hpp"
#include "mshift/validate.hpp"

#include "helpers.hpp"

using namespace mshift;

namespace {

Instance zero_request_instance() {
    Instance inst;
    inst.nodes = {{1, 0.0, 0.0, NodeKind::Depot}};
    inst.fleet = {1, 10.0, 1.0};
    inst.phi = 1.0;
    inst.horizon = {0.0, 100.0};
    inst.finalize();
    return inst;
}

// Hand-scheduled direct tour for line_shift_tiny: depot(-2) -> P(0) -> Q(12) -> depot.
Solution direct_tour_solution() {
    Solution sol;
    Route r;
    r.depot_node = 1;
    r.stops = {
        {1, ActionKind::None, -1, 0.0, 0.0, 0.0, 0.0},
        {5, ActionKind::Pickup, 1, 2.0, 2.0, 2.0, 5.0},
        {6, ActionKind::Delivery, 1, 14.0, 14.0, 14.0, 0.0},
        {1, ActionKind::None, -1, 28.0, 28.0, 28.0, 0.0},
    };
    r.distance = 28.0;
    sol.routes = {r};
    sol.sl_assignments = {std::nullopt};
    sol.total_distance = 28.0;
    sol.total_flow_cost = 0.0;
    return sol;
}

} // namespace

TEST_CASE("objective and budget arithmetic on the worked pairs") {
    CHECK(policy_cost(1.0, {0.5, 2.0 / 3.0}, 15.0, 20.0) == doctest::Approx(35.0).epsilon(1e-12));
    CHECK(policy_cost(1.0, {0.6, 0.15}, 20.0, 5.0) == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(policy_cost(1.0, {1.0, 0.0}, 100.0, 40.0) == doctest::Approx(100.0).epsilon(1e-12));

    CHECK(std::abs(realized_budget(1.0, {0.5, 2.0 / 3.0}, 15.0, 20.0)) <= 1e-12);
    CHECK(std::abs(realized_budget(1.0, {0.6, 0.15}, 20.0, 5.0)) <= 1e-12);
    CHECK(realized_budget(1.0, {0.3, 4.0}, 0.0, 0.0) == 0.0);
}

TEST_CASE("objective equals phi*d + f minus the realized budget") {
    Rng rng(42);
    for (int i = 0; i < 500; ++i) {
        const double phi = rng.next_real(0.1, 3.0);
        const double d = rng.next_real(0.0, 500.0);
        const double f = rng.next_real(0.0, 200.0);
        const Policy p{rng.next_real(), rng.next_real(0.0, 5.0)};
        const double lhs = policy_cost(phi, p, d, f);
        const double rhs = phi * d + f - realized_budget(phi, p, d, f);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("instance distance lookups") {
    Instance inst = testutil::line_shift_tiny();
    CHECK(inst.dist_by_id(5, 6) == doctest::Approx(12.0));
    CHECK(inst.travel_time(inst.pos_of(1), inst.pos_of(5)) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)inst.pos_of(99), InvalidInstanceError);

    // explicit matrix wins over coordinates
    Instance m = zero_request_instance();
    m.nodes.push_back({2, 3.0, 4.0, NodeKind::Depot});
    m.dist_matrix = {{0.0, 7.5}, {7.5, 0.0}};
    m.finalize();
    CHECK(m.dist(0, 1) == doctest::Approx(7.5));
}

TEST_CASE("validate_instance flags structural problems") {
    CHECK(validate_instance(testutil::two_leg_choice()).empty());
    CHECK(validate_instance(testutil::line_shift_tiny()).empty());
    CHECK(validate_instance(testutil::three_request_mix()).empty());

    Instance inst = testutil::line_shift_tiny();
    inst.nodes.push_back({1, 5.0, 5.0, NodeKind::Pickup}); // duplicate id
    inst.requests[0].demand = -1.0;
    inst.requests[0].pickup_tw = {10.0, 5.0};
    inst.legs[0].departures = {10.0, 10.0};
    inst.phi = 0.0;
    inst.finalize();
    const auto problems = validate_instance(inst);
    auto has = [&](const char* needle) {
        for (const auto& p : problems)
            if (p.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(has("duplicate node id"));
    CHECK(has("demand must be positive"));
    CHECK(has("pickup window inverted"));
    CHECK(has("departures not strictly increasing"));
    CHECK(has("phi must be positive"));
}

TEST_CASE("schedule_route walks a closed tour with earliest starts") {
    Instance inst = testutil::line_shift_tiny();
    std::vector<TaskSpec> tasks = {
        {inst.pos_of(5), 0.0, 480.0, 0.0, 5.0, ActionKind::Pickup, 0},
        {inst.pos_of(6), 0.0, 480.0, 0.0, -5.0, ActionKind::Delivery, 0},
    };
    RouteTiming tm = schedule_route(inst, inst.pos_of(1), tasks);
    REQUIRE(tm.feasible);
    CHECK(tm.distance == doctest::Approx(28.0));
    CHECK(tm.arrival[0] == doctest::Approx(2.0));
    CHECK(tm.completion[1] == doctest::Approx(14.0));
    CHECK(tm.return_arrival == doctest::Approx(28.0));

    // waiting before a window opens is free
    tasks[0].win_lo = 50.0;
    tm = schedule_route(inst, inst.pos_of(1), tasks);
    REQUIRE(tm.feasible);
    CHECK(tm.start[0] == doctest::Approx(50.0));
    CHECK(tm.completion[1] == doctest::Approx(62.0));

    // overload kills the tour
    tasks[0].win_lo = 0.0;
    tasks[0].load_delta = 26.0;
    tasks[1].load_delta = -26.0;
    CHECK_FALSE(schedule_route(inst, inst.pos_of(1), tasks).feasible);
}

TEST_CASE("validate_solution accepts a hand-checked tour") {
    Instance inst = testutil::line_shift_tiny();
    const Solution sol = direct_tour_solution();
    const ValidationReport rep = validate_solution(inst, sol);
    CHECK(rep.ok());
    CHECK(vehicles_used(sol) == 1);
    CHECK(max_load(sol) == doctest::Approx(5.0));
    CHECK(modal_shift(sol) == doctest::Approx(0.0));
}

TEST_CASE("validate_solution on the empty solution of an empty instance") {
    Instance inst = zero_request_instance();
    Solution sol;
    CHECK(validate_solution(inst, sol).ok());
    CHECK(vehicles_used(sol) == 0);
    CHECK(max_load(sol) == doctest::Approx(0.0));
}

TEST_CASE("validate_solution flags exactly one violation for a closed window") {
    Instance inst = testutil::line_shift_tiny();
    inst.requests[0].delivery_tw = {0.0, 10.0}; // arrival is 14
    inst.finalize();
    const ValidationReport rep = validate_solution(inst, direct_tour_solution());
    CHECK_FALSE(rep.ok());
    CHECK(rep.count(ViolationCode::TimeWindowViolated) == 1);
    CHECK(static_cast<int>(rep.violations.size()) == 1);
}

TEST_CASE("validate_solution recomputes the stored totals") {
    Instance inst = testutil::line_shift_tiny();
    Solution sol = direct_tour_solution();
    sol.total_distance = 30.0;
    CHECK(validate_solution(inst, sol).count(ViolationCode::DistanceMismatch) == 1);

    sol = direct_tour_solution();
    sol.total_flow_cost = 1.0;
    CHECK(validate_solution(inst, sol).count(ViolationCode::FlowCostMismatch) == 1);

    sol = direct_tour_solution();
    sol.routes[0].stops[1].load_after = 4.0;
    CHECK(validate_solution(inst, sol).count(ViolationCode::LoadInconsistent) >= 1);

    sol = direct_tour_solution();
    sol.sl_assignments[0] = SlAssignment{0, 99}; // departure index out of range
    CHECK_THROWS_AS((void)validate_solution(inst, sol), InvalidInstanceError);
}

TEST_CASE("validate_solution throws on unknown ids") {
    Instance inst = testutil::line_shift_tiny();
    Solution sol = direct_tour_solution();
    sol.routes[0].stops[1].node_id = 77;
    CHECK_THROWS_AS((void)validate_solution(inst, sol), InvalidInstanceError);
}

TEST_CASE("widening windows and raising capacities keeps a feasible tour feasible") {
    Instance inst = testutil::line_shift_tiny();
    const Solution sol = direct_tour_solution();
    REQUIRE(validate_solution(inst, sol).ok());

    Instance wider = inst;
    wider.requests[0].pickup_tw = {0.0, 1000.0};
    wider.requests[0].delivery_tw = {0.0, 1000.0};
    wider.horizon = {0.0, 1000.0};
    wider.fleet.capacity += 50.0;
    wider.legs[0].capacity_per_departure += 50.0;
    wider.finalize();
    CHECK(validate_solution(wider, sol).ok());
}

TEST_CASE("modal shift counts assigned requests") {
    Solution sol;
    sol.sl_assignments.assign(8, std::nullopt);
    CHECK(modal_shift(sol) == doctest::Approx(0.0));
    sol.sl_assignments[1] = SlAssignment{0, 0};
    sol.sl_assignments[5] = SlAssignment{0, 1};
    CHECK(modal_shift(sol) == doctest::Approx(0.25));
    for (auto& a : sol.sl_assignments) a = SlAssignment{0, 0};
    CHECK(modal_shift(sol) == doctest::Approx(1.0));
}

TEST_CASE("demand-weighted modal shift") {
    Instance inst = testutil::three_request_mix(); // demands 8, 6, 4
    Solution sol;
    sol.sl_assignments.assign(3, std::nullopt);
    sol.sl_assignments[0] = SlAssignment{0, 0};
    CHECK(modal_shift_by_demand(inst, sol) == doctest::Approx(8.0 / 18.0));
}

TEST_CASE("rng streams are reproducible and in range") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.next_below(13) < 13);
        const int v = r.next_int(-3, 4);
        CHECK(v >= -3);
        CHECK(v <= 4);
        const double x = r.next_real();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(r.next_below(1) == 0);

    std::vector<int> v{1, 2, 3, 4, 5, 6};
    Rng s(99);
    s.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6});

    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}
