#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mshift/alns.hpp"
#include "mshift/oracle.hpp"
#include "mshift/rng.hpp"
#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift::policy {

// What the policy layer sees of one carrier response.
struct Response {
    double distance = 0.0;
    double flow_cost = 0.0;
    double cost = 0.0; // carrier objective under the evaluated policy
    double modal_shift = 0.0;
    double modal_shift_demand = 0.0;
    double vehicles = 0.0;
    double max_load = 0.0;
    Solution solution; // empty for abstract models
};

// Lower level abstraction: the carrier's best response per scenario. Stateful
// so instance-backed models can chain warm starts across policy evaluations.
class CarrierModel {
public:
    virtual ~CarrierModel() = default;
    virtual int n_scenarios() const = 0;
    virtual double phi() const = 0;
    virtual Response solve(int scenario, const Policy& p) = 0;
};

enum class SolverKind { Alns, Exact };

struct SolverConfig {
    SolverKind kind = SolverKind::Alns;
    alns::AlnsParams alns;
    bool chain_warm_starts = true; // reuse the previous solution per scenario
    std::uint64_t seed = 1;
};

std::unique_ptr<CarrierModel> make_instance_model(std::vector<Instance> scenarios,
                                                  const SolverConfig& cfg);
// Single abstract scenario given by an explicit alternative list.
std::unique_ptr<CarrierModel> make_finite_model(std::vector<oracle::Alternative> alts, double phi);

struct PolicyOutcome {
    Policy policy;
    double avg_distance = 0.0;
    double avg_flow = 0.0;
    double avg_cost = 0.0;
    double avg_realized_budget = 0.0;
    double modal_shift = 0.0;
    double modal_shift_demand = 0.0;
    double avg_vehicles = 0.0;
    double avg_max_load = 0.0;
    std::vector<Response> per_scenario;
};

PolicyOutcome evaluate_policy(CarrierModel& model, const Policy& p);

// Average realized budget under (s, t) minus the target. Positive gap means
// the policy spends more than budgeted.
double budget_gap(CarrierModel& model, double subsidy, double tax, double budget);

// Closed-form full-subsidy policy: s = 1, tax sized so the realized budget
// meets the target exactly. Throws InfeasibleError when the target exceeds the
// full-subsidy flow cost (no nonnegative tax can close the gap).
struct OptimalPolicyResult {
    Policy policy;
    PolicyOutcome outcome;
};
OptimalPolicyResult optimal_policy(CarrierModel& model, double budget);

struct BisectionOptions {
    double bracket_lo = 0.0;
    double bracket_hi = 5.0;
    double eps = -1.0; // auto: 1e-3 * max(1, |budget|)
    int max_iterations = 40;
};

struct BisectionStep {
    double lo = 0.0, hi = 0.0, mid = 0.0;
    double gap_lo = 0.0, gap_hi = 0.0, gap_mid = 0.0;
};

struct BisectionResult {
    bool converged = false;
    double tax = 0.0;
    int iterations = 0;
    std::string failure; // why the bracket was rejected, when not converged
    std::vector<BisectionStep> steps;
    PolicyOutcome outcome; // at (subsidy, tax) when converged
};

// Midpoint bisection on the tax for a fixed subsidy so the realized budget
// hits the target. Requires a sign change over the bracket (an endpoint
// already inside eps counts as the root).
BisectionResult bisection_tax_search(CarrierModel& model, double subsidy, double budget,
                                     const BisectionOptions& opts = {});

struct ParetoPoint {
    double budget_target = 0.0;
    PolicyOutcome outcome;
};

struct OmittedPoint {
    double subsidy = 0.0;
    double budget_target = 0.0;
    std::string reason;
};

struct ParetoResult {
    std::vector<ParetoPoint> points;
    std::vector<OmittedPoint> omitted;
};

// Sweeps the subsidy grid x budget list; each point balances the budget by
// bisection on the tax. Non-bracketable points land in `omitted`.
ParetoResult pareto_sweep(CarrierModel& model, const std::vector<double>& subsidy_grid,
                          const std::vector<double>& budgets,
                          const BisectionOptions& opts = {});

// ---- structural property checks over finite alternative sets ----------------

struct PropViolation {
    std::string check; // short machine-friendly id, e.g. "subsidy-monotone-flow"
    std::string message;
};

struct PropositionReport {
    long long trials = 0;        // budget-feasible policy pairs exercised
    long long samples_drawn = 0; // including rejected draws
    std::vector<PropViolation> violations;
    bool ok() const { return violations.empty(); }
};

struct PropositionOptions {
    long long min_feasible_trials = 1000;
    std::uint64_t seed = 1;
    // Deliberately corrupt the responses (selection forced off-optimum at high
    // subsidy); the suite must then report violations. Used as a self-test of
    // the harness.
    bool negative_control = false;
};

// Exercises the structural guarantees of the bilevel model on one finite
// alternative set: monotone flow in the subsidy, antitone distance, exact
// budget-feasible tax roots, the full-subsidy closed form, and invariance of
// budget-plus-cost at full subsidy.
PropositionReport verify_propositions(const std::vector<oracle::Alternative>& alts, double phi,
                                      const PropositionOptions& opt = {});

// Random strictly non-dominated alternative set (distance ascending, flow
// strictly descending, gaps bounded away from ties).
std::vector<oracle::Alternative> random_nondominated_set(int n_alts, Rng& rng);

} // namespace mshift::policy
