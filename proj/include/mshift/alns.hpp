#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mshift/rng.hpp"
#include "mshift/schedule.hpp"
#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift::alns {

struct AlnsParams {
    std::uint64_t seed = 1;
    int max_iterations = 5000;
    int segment_length = 100;      // iterations between weight updates
    double reaction_factor = 0.1;  // blend factor for operator weights
    double score_new_best = 33.0;
    double score_improving = 9.0;
    double score_accepted = 13.0;  // accepted but worse than current
    double start_temp_ratio = 0.05;
    double cooling = 0.9994;
    double remove_frac_min = 0.10;
    double remove_frac_max = 0.40;
    // Insertion-cost noise: with probability noise_prob an iteration ranks
    // candidate insertions by delta + U(-span, span), span = noise_amp times
    // the dearest road hop. Keeps repairs from deterministically cycling
    // through the same handful of plans.
    double noise_amp = 0.75;
    double noise_prob = 0.5;
    bool keep_trace = false;
    // Revalidate every accepted candidate from scratch; costs time, used by
    // property tests to catch operators that corrupt feasibility.
    bool validate_each_accept = false;
};

struct TraceRow {
    int iteration = 0;
    double current_cost = 0.0;
    double best_cost = 0.0;
    int destroy_op = -1;
    int repair_op = -1;
    bool accepted = false;
};

struct SolverRun {
    Solution best;
    double best_cost = 0.0;
    int iterations = 0;
    std::vector<TraceRow> trace; // empty unless keep_trace
};

// ---- working representation -------------------------------------------------

struct PlanRoute {
    int depot_pos = 0;
    std::vector<TaskSpec> tasks;
    // cached earliest-start schedule, same length as tasks
    std::vector<double> arrival, start, completion, load_after;
    double distance = 0.0;
};

enum class ModeKind { Unserved, Direct, Scheduled };

struct RequestMode {
    ModeKind kind = ModeKind::Unserved;
    int leg = -1;
    int departure = -1;
};

struct Plan {
    const Instance* inst = nullptr;
    std::vector<PlanRoute> routes;
    std::vector<RequestMode> modes;                  // by request position
    std::vector<std::vector<double>> departure_load; // [leg][departure] demand booked
    double total_distance = 0.0;
    double total_flow = 0.0;

    double cost(const Policy& p) const;
    int n_served() const;
};

Plan empty_plan(const Instance& inst);
Solution plan_to_solution(const Plan& plan);
// Rebuilds the working form from a stored solution (used for warm starts).
// Throws InfeasibleError when the solution does not schedule cleanly.
Plan plan_from_solution(const Instance& inst, const Solution& sol);

// ---- insertion machinery ----------------------------------------------------

// A fully specified way to add one request to a plan. Slot indices address the
// task array of the target route before the insertion ("insert before task k";
// k == size means append). For scheduled service the first-mile pair goes into
// route_a and the last-mile pair into route_b (which may be the same route; the
// last-mile slots then address the array after the first-mile insertion).
struct Insertion {
    ModeKind kind = ModeKind::Direct;
    int leg = -1;
    int departure = -1;
    int route_a = -1; // -1 opens a new route from depot_a
    int depot_a = -1;
    int slot_a1 = 0, slot_a2 = 0;
    int route_b = -1;
    int depot_b = -1;
    int slot_b1 = 0, slot_b2 = 0;
    double delta_distance = 0.0;
    double delta_cost = 0.0;
};

// Cheapest feasible direct (pure road) insertion, if any.
std::optional<Insertion> best_direct_insertion(const Plan& plan, int req_pos, const Policy& policy);

// All scheduled-line candidates: for every leg and every reachable departure,
// the cheapest first-mile placement determines the departure, then the
// cheapest last-mile placement completes the candidate.
std::vector<Insertion> sl_insertion_candidates(const Plan& plan, int req_pos, const Policy& policy);

// Best over direct and scheduled candidates.
std::optional<Insertion> best_insertion(const Plan& plan, int req_pos, const Policy& policy);

void apply_insertion(Plan& plan, int req_pos, const Insertion& ins);
void remove_request(Plan& plan, int req_pos);

// ---- operators ---------------------------------------------------------------

// Each destroy op removes up to k served requests and returns their positions.
std::vector<int> destroy_random(Plan& plan, int k, Rng& rng);
std::vector<int> destroy_worst(Plan& plan, int k, const Policy& policy, Rng& rng);
std::vector<int> destroy_related(Plan& plan, int k, Rng& rng);
// Prefers requests currently routed over a scheduled leg (falls back to random).
std::vector<int> destroy_sl_focused(Plan& plan, int k, Rng& rng);

// Repairs insert every listed request back; false when one of them fits nowhere
// (the plan is then left partially repaired and must be discarded). When
// noise_rng is given each candidate's rank gets a U(-noise_span, noise_span)
// offset; the applied insertion keeps its true cost.
bool repair_greedy(Plan& plan, std::vector<int> removed, const Policy& policy,
                   Rng* noise_rng = nullptr, double noise_span = 0.0);
bool repair_regret2(Plan& plan, std::vector<int> removed, const Policy& policy,
                    Rng* noise_rng = nullptr, double noise_span = 0.0);

// Simulated-annealing acceptance.
bool accept(double candidate_cost, double current_cost, double temperature, Rng& rng);

// Smoothed roulette weights: w <- (1-r) w + r * score/uses for used operators.
void update_weights(std::vector<double>& weights, const std::vector<double>& scores,
                    const std::vector<int>& uses, double reaction_factor);

// Greedy randomized construction; throws InfeasibleError naming the requests
// that fit nowhere after the retry budget.
Plan construct_initial(const Instance& inst, const Policy& policy, Rng& rng);

SolverRun solve(const Instance& inst, const Policy& policy, const AlnsParams& params,
                const Solution* warm_start = nullptr);

} // namespace mshift::alns
