#pragma once

#include <vector>

#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift {

// One planned non-depot stop. Node and request are positions (array indices),
// not public ids; translation happens at the Solution boundary.
struct TaskSpec {
    int node_pos = 0;
    double win_lo = 0.0;
    double win_hi = 0.0;
    double service = 0.0;
    double load_delta = 0.0;
    ActionKind action = ActionKind::None;
    int req_pos = -1;
};

struct VehState {
    int node_pos = 0;
    double time = 0.0; // completion time of the last action
    double load = 0.0;
};

// Earliest-start step shared by the solver, the exhaustive search and the
// validator, so all three produce bit-identical schedules. Returns false when
// the stop cannot be reached inside its window or the load goes out of range.
inline bool advance(const Instance& inst, double cap, VehState& st, const TaskSpec& t,
                    double* arrival_out = nullptr, double* start_out = nullptr) {
    const double arrival = st.time + inst.travel_time(st.node_pos, t.node_pos);
    const double start = arrival < t.win_lo ? t.win_lo : arrival;
    if (start > t.win_hi) return false;
    // small slack so chained +q/-q demand sums do not fail on rounding dust
    const double load = st.load + t.load_delta;
    if (load > cap + 1e-9 || load < -1e-9) return false;
    st.node_pos = t.node_pos;
    st.time = start + t.service;
    st.load = load;
    if (arrival_out) *arrival_out = arrival;
    if (start_out) *start_out = start;
    return true;
}

struct RouteTiming {
    bool feasible = false;
    double distance = 0.0;       // closed tour length including the return leg
    double return_arrival = 0.0; // back at the depot
    std::vector<double> arrival, start, completion;
};

// Schedules a closed tour depot -> tasks -> depot with earliest starts.
// The vehicle may leave the depot at horizon.earliest; the tour must be back
// by horizon.latest.
RouteTiming schedule_route(const Instance& inst, int depot_pos, const std::vector<TaskSpec>& tasks);

} // namespace mshift
