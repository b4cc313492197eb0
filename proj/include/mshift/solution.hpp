#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mshift/types.hpp"

namespace mshift {

// What a vehicle does at a stop. A stop may carry several actions (e.g. two
// pickups at the same node are still two stops here; one action per stop).
enum class ActionKind {
    None,        // depot start / end
    Pickup,      // collect request load at its pickup node
    Delivery,    // hand over at the delivery node
    StationDrop, // unload onto a scheduled departure at the origin station
    StationPick, // reload from a scheduled arrival at the destination station
};

struct Stop {
    int node_id = 0;
    ActionKind action = ActionKind::None;
    int request_id = -1;     // -1 for depot stops
    double arrival = 0.0;    // driving arrival time
    double start = 0.0;      // service start (>= arrival, inside the window)
    double departure = 0.0;  // start + service time
    double load_after = 0.0; // vehicle load after this stop's action
};

struct Route {
    int depot_node = 0; // tour starts and ends here
    std::vector<Stop> stops;
    double distance = 0.0;
};

// Which scheduled departure a request rides, if any.
struct SlAssignment {
    int leg_index = 0;
    int departure_index = 0;
};

struct Solution {
    std::vector<Route> routes;
    // Indexed by request position in Instance::requests; empty optional = pure road.
    std::vector<std::optional<SlAssignment>> sl_assignments;
    double total_distance = 0.0;
    double total_flow_cost = 0.0; // sum of tariff * demand over assigned legs
    // Producer's claim; the authoritative check is validate_solution.
    bool feasible = true;
};

// Count of vehicles with at least one non-depot stop.
int vehicles_used(const Solution& sol);

// Largest onboard load over all stops, 0 for an empty solution.
double max_load(const Solution& sol);

// Share of requests routed over at least one scheduled leg.
double modal_shift(const Solution& sol);

// Same share weighted by demand instead of request count.
double modal_shift_by_demand(const Instance& inst, const Solution& sol);

} // namespace mshift
