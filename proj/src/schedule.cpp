#include "mshift/schedule.hpp"

namespace mshift {

RouteTiming schedule_route(const Instance& inst, int depot_pos, const std::vector<TaskSpec>& tasks) {
    RouteTiming out;
    out.arrival.reserve(tasks.size());
    out.start.reserve(tasks.size());
    out.completion.reserve(tasks.size());

    VehState st{depot_pos, inst.horizon.earliest, 0.0};
    double dist = 0.0;
    int prev = depot_pos;
    for (const auto& t : tasks) {
        double arrival = 0.0, start = 0.0;
        if (!advance(inst, inst.fleet.capacity, st, t, &arrival, &start)) return out;
        dist += inst.dist(prev, t.node_pos);
        prev = t.node_pos;
        out.arrival.push_back(arrival);
        out.start.push_back(start);
        out.completion.push_back(st.time);
    }
    dist += inst.dist(prev, depot_pos);
    const double back = st.time + inst.travel_time(prev, depot_pos);
    if (back > inst.horizon.latest) return out;

    out.feasible = true;
    out.distance = dist;
    out.return_arrival = back;
    return out;
}

} // namespace mshift
