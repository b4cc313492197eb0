#pragma once

#include <string>
#include <vector>

#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift {

// Unknown ids (nodes, requests, legs, departures) are structural-reference
// problems and throw InvalidInstanceError instead of being collected here.
enum class ViolationCode {
    RequestNotServed,
    RequestServedTwice,
    PairOrderViolated,     // delivery-side action before pickup-side action
    PairSplit,             // pickup and delivery of a road request on different vehicles
    TimeWindowViolated,
    TimingInconsistent,    // stored times disagree with travel times / service
    CapacityExceeded,
    NegativeLoad,
    LoadInconsistent,      // stored load_after disagrees with the action ledger
    DepotViolation,        // route does not start and end at its depot
    HorizonViolated,
    VehicleCountExceeded,
    SlAssignmentInvalid,   // bad leg/departure index, or actions disagree with it
    SlDepartureMissed,     // station drop completes after the departure leaves
    SlPickupTooEarly,      // station pickup starts before the train arrives
    SlCapacityExceeded,    // one departure carries more demand than it can
    DistanceMismatch,
    FlowCostMismatch,
};

struct Violation {
    ViolationCode code;
    std::string detail;
    int request_id = -1; // -1 when not tied to a request
    int route_index = -1;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    int count(ViolationCode c) const {
        int n = 0;
        for (const auto& v : violations)
            if (v.code == c) ++n;
        return n;
    }
};

const char* violation_name(ViolationCode c);

// Recomputes every schedule and load from scratch and cross-checks the stored
// values. Collects all violations instead of stopping at the first one.
// `tol` absorbs serialization rounding; defaults keep exact solver output clean.
ValidationReport validate_solution(const Instance& inst, const Solution& sol, double tol = 1e-9);

} // namespace mshift
