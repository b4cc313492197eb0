#pragma once

#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift {

// Carrier objective under a (subsidy, tax) policy:
//   (1 + t) * phi * distance + (1 - s) * flow_cost
inline double policy_cost(double phi, const Policy& p, double distance, double flow_cost) {
    return (1.0 + p.tax) * phi * distance + (1.0 - p.subsidy) * flow_cost;
}

inline double evaluate_objective(const Instance& inst, const Policy& p, const Solution& sol) {
    return policy_cost(inst.phi, p, sol.total_distance, sol.total_flow_cost);
}

// Net public spending: subsidy outlay minus tax income. Zero means the policy
// pays for itself exactly.
inline double realized_budget(double phi, const Policy& p, double distance, double flow_cost) {
    return p.subsidy * flow_cost - p.tax * phi * distance;
}

inline double realized_budget(const Instance& inst, const Policy& p, const Solution& sol) {
    return realized_budget(inst.phi, p, sol.total_distance, sol.total_flow_cost);
}

inline double forwarder_cost(const Solution& sol, const Policy& p, double phi) {
    return policy_cost(phi, p, sol.total_distance, sol.total_flow_cost);
}

} // namespace mshift
