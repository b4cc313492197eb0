#pragma once

#include <cstdint>
#include <vector>

#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift::oracle {

// One attainable outcome of the carrier problem, reduced to what the policy
// levers can see: total driven distance and total scheduled-line spend.
struct Alternative {
    double distance = 0.0;
    double flow_cost = 0.0;
};

struct ArgminResult {
    int index = -1; // position in the alternative list
    double cost = 0.0;
};

// Exact minimizer of (1+t) phi d + (1-s) f over a finite alternative list.
// Ties break toward smaller distance, then smaller flow cost, then lower index.
ArgminResult finite_argmin(const std::vector<Alternative>& alts, double phi, const Policy& policy);

// Globally optimal solution by exhaustive search over mode assignments with a
// per-vehicle reachability DP. Guard rails: at most 6 requests and 2 vehicles,
// beyond that it throws (the search is exponential by design).
Solution enumerate_optimal(const Instance& inst, const Policy& policy);

// Distinct (distance, flow_cost) optima attainable across a policy grid,
// sorted by distance then flow cost. This is the exact finite image of the
// carrier's response; the policy layer can then work on it in closed form.
std::vector<Alternative> project_finite(const Instance& inst,
                                        const std::vector<Policy>& policy_grid);

} // namespace mshift::oracle
