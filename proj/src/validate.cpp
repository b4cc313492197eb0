#include "mshift/validate.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "mshift/errors.hpp"

namespace mshift {

const char* violation_name(ViolationCode c) {
    switch (c) {
        case ViolationCode::RequestNotServed: return "request-not-served";
        case ViolationCode::RequestServedTwice: return "request-served-twice";
        case ViolationCode::PairOrderViolated: return "pair-order-violated";
        case ViolationCode::PairSplit: return "pair-split";
        case ViolationCode::TimeWindowViolated: return "time-window-violated";
        case ViolationCode::TimingInconsistent: return "timing-inconsistent";
        case ViolationCode::CapacityExceeded: return "capacity-exceeded";
        case ViolationCode::NegativeLoad: return "negative-load";
        case ViolationCode::LoadInconsistent: return "load-inconsistent";
        case ViolationCode::DepotViolation: return "depot-violation";
        case ViolationCode::HorizonViolated: return "horizon-violated";
        case ViolationCode::VehicleCountExceeded: return "vehicle-count-exceeded";
        case ViolationCode::SlAssignmentInvalid: return "sl-assignment-invalid";
        case ViolationCode::SlDepartureMissed: return "sl-departure-missed";
        case ViolationCode::SlPickupTooEarly: return "sl-pickup-too-early";
        case ViolationCode::SlCapacityExceeded: return "sl-capacity-exceeded";
        case ViolationCode::DistanceMismatch: return "distance-mismatch";
        case ViolationCode::FlowCostMismatch: return "flow-cost-mismatch";
    }
    return "unknown";
}

namespace {

struct ActionSite {
    int route = -1;
    int stop = -1; // index within the route
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

ValidationReport validate_solution(const Instance& inst, const Solution& sol, double tol) {
    ValidationReport rep;
    auto flag = [&](ViolationCode code, std::string detail, int req_id = -1, int route = -1) {
        rep.violations.push_back({code, std::move(detail), req_id, route});
    };

    std::unordered_map<int, int> req_pos; // public id -> position
    for (int i = 0; i < inst.n_requests(); ++i) req_pos[inst.requests[static_cast<std::size_t>(i)].id] = i;

    if (sol.sl_assignments.size() != inst.requests.size())
        throw InvalidInstanceError("solution sl_assignments size does not match request count");
    for (std::size_t i = 0; i < sol.sl_assignments.size(); ++i) {
        if (!sol.sl_assignments[i]) continue;
        const auto& a = *sol.sl_assignments[i];
        if (a.leg_index < 0 || a.leg_index >= static_cast<int>(inst.legs.size()))
            throw InvalidInstanceError("sl assignment cites unknown leg " + std::to_string(a.leg_index));
        const auto& leg = inst.legs[static_cast<std::size_t>(a.leg_index)];
        if (a.departure_index < 0 || a.departure_index >= static_cast<int>(leg.departures.size()))
            throw InvalidInstanceError("sl assignment cites unknown departure " +
                                       std::to_string(a.departure_index) + " on leg " +
                                       std::to_string(a.leg_index));
    }

    // Per-route physical checks; remember where each request action happened.
    std::unordered_map<int, std::vector<std::pair<ActionKind, ActionSite>>> sites;
    int active_routes = 0;

    for (int ri = 0; ri < static_cast<int>(sol.routes.size()); ++ri) {
        const auto& route = sol.routes[static_cast<std::size_t>(ri)];
        if (route.stops.empty()) continue;
        ++active_routes;
        const int depot_pos = inst.pos_of(route.depot_node); // throws on unknown id

        const auto& first = route.stops.front();
        const auto& last = route.stops.back();
        if (first.node_id != route.depot_node || last.node_id != route.depot_node ||
            first.action != ActionKind::None || last.action != ActionKind::None ||
            inst.nodes[static_cast<std::size_t>(depot_pos)].kind != NodeKind::Depot) {
            flag(ViolationCode::DepotViolation,
                 "route " + std::to_string(ri) + " does not open and close at its depot", -1, ri);
        }

        double load = 0.0;
        double prev_departure = 0.0;
        int prev_pos = depot_pos;
        bool have_prev = false;

        for (int si = 0; si < static_cast<int>(route.stops.size()); ++si) {
            const auto& stop = route.stops[static_cast<std::size_t>(si)];
            const int node_pos = inst.pos_of(stop.node_id);
            const std::string where =
                "route " + std::to_string(ri) + " stop " + std::to_string(si);

            if (have_prev) {
                const double expected = prev_departure + inst.travel_time(prev_pos, node_pos);
                if (std::abs(stop.arrival - expected) > tol)
                    flag(ViolationCode::TimingInconsistent,
                         where + ": arrival " + fmt(stop.arrival) + " != previous departure + travel " +
                             fmt(expected),
                         stop.request_id, ri);
            }
            if (stop.start < stop.arrival - tol)
                flag(ViolationCode::TimingInconsistent,
                     where + ": service starts before arrival", stop.request_id, ri);

            double service = 0.0;
            double load_delta = 0.0;
            double win_lo = inst.horizon.earliest, win_hi = inst.horizon.latest;

            if (stop.action != ActionKind::None) {
                auto itp = req_pos.find(stop.request_id);
                if (itp == req_pos.end())
                    throw InvalidInstanceError("stop cites unknown request id " +
                                               std::to_string(stop.request_id));
                const auto& req = inst.requests[static_cast<std::size_t>(itp->second)];
                service = req.service_time;
                const auto& asg = sol.sl_assignments[static_cast<std::size_t>(itp->second)];

                switch (stop.action) {
                    case ActionKind::Pickup:
                        win_lo = req.pickup_tw.earliest;
                        win_hi = req.pickup_tw.latest;
                        load_delta = req.demand;
                        if (stop.node_id != req.pickup_node)
                            flag(ViolationCode::SlAssignmentInvalid,
                                 where + ": pickup at wrong node", req.id, ri);
                        break;
                    case ActionKind::Delivery:
                        win_lo = req.delivery_tw.earliest;
                        win_hi = req.delivery_tw.latest;
                        load_delta = -req.demand;
                        if (stop.node_id != req.delivery_node)
                            flag(ViolationCode::SlAssignmentInvalid,
                                 where + ": delivery at wrong node", req.id, ri);
                        break;
                    case ActionKind::StationDrop: {
                        load_delta = -req.demand;
                        if (!asg) {
                            flag(ViolationCode::SlAssignmentInvalid,
                                 where + ": station drop for a road-only request", req.id, ri);
                        } else {
                            const auto& leg = inst.legs[static_cast<std::size_t>(asg->leg_index)];
                            const double dep =
                                leg.departures[static_cast<std::size_t>(asg->departure_index)];
                            if (stop.node_id != leg.from_station)
                                flag(ViolationCode::SlAssignmentInvalid,
                                     where + ": drop at a node that is not the leg origin", req.id, ri);
                            if (stop.departure > dep + tol)
                                flag(ViolationCode::SlDepartureMissed,
                                     where + ": drop completes at " + fmt(stop.departure) +
                                         " after departure " + fmt(dep),
                                     req.id, ri);
                        }
                        break;
                    }
                    case ActionKind::StationPick: {
                        load_delta = req.demand;
                        if (!asg) {
                            flag(ViolationCode::SlAssignmentInvalid,
                                 where + ": station pickup for a road-only request", req.id, ri);
                        } else {
                            const auto& leg = inst.legs[static_cast<std::size_t>(asg->leg_index)];
                            const double dep =
                                leg.departures[static_cast<std::size_t>(asg->departure_index)];
                            const double available = dep + leg.travel_time;
                            if (stop.node_id != leg.to_station)
                                flag(ViolationCode::SlAssignmentInvalid,
                                     where + ": pickup at a node that is not the leg destination",
                                     req.id, ri);
                            if (stop.start < available - tol)
                                flag(ViolationCode::SlPickupTooEarly,
                                     where + ": picked up at " + fmt(stop.start) +
                                         " before the freight arrives at " + fmt(available),
                                     req.id, ri);
                        }
                        break;
                    }
                    default: break;
                }
                sites[req.id].push_back({stop.action, {ri, si}});
            }

            if (stop.start < win_lo - tol || stop.start > win_hi + tol)
                flag(ViolationCode::TimeWindowViolated,
                     where + ": service start " + fmt(stop.start) + " outside window [" + fmt(win_lo) +
                         ", " + fmt(win_hi) + "]",
                     stop.request_id, ri);
            if (std::abs(stop.departure - (stop.start + service)) > tol)
                flag(ViolationCode::TimingInconsistent,
                     where + ": departure != start + service time", stop.request_id, ri);

            load += load_delta;
            if (std::abs(stop.load_after - load) > tol)
                flag(ViolationCode::LoadInconsistent,
                     where + ": stored load " + fmt(stop.load_after) + " != recomputed " + fmt(load),
                     stop.request_id, ri);
            if (load > inst.fleet.capacity + tol)
                flag(ViolationCode::CapacityExceeded,
                     where + ": load " + fmt(load) + " over capacity " + fmt(inst.fleet.capacity),
                     stop.request_id, ri);
            if (load < -tol)
                flag(ViolationCode::NegativeLoad, where + ": load " + fmt(load) + " below zero",
                     stop.request_id, ri);

            if (stop.arrival < inst.horizon.earliest - tol || stop.departure > inst.horizon.latest + tol)
                flag(ViolationCode::HorizonViolated, where + ": outside the planning horizon",
                     stop.request_id, ri);

            prev_departure = stop.departure;
            prev_pos = node_pos;
            have_prev = true;
        }
    }

    if (active_routes > inst.fleet.n_vehicles)
        flag(ViolationCode::VehicleCountExceeded,
             std::to_string(active_routes) + " routes exceed the fleet of " +
                 std::to_string(inst.fleet.n_vehicles));

    // Serving structure per request.
    for (const auto& req : inst.requests) {
        auto it = sites.find(req.id);
        const auto& asg = sol.sl_assignments[static_cast<std::size_t>(req_pos[req.id])];
        if (it == sites.end()) {
            flag(ViolationCode::RequestNotServed, "request " + std::to_string(req.id) + " never served",
                 req.id);
            continue;
        }
        int n_pick = 0, n_del = 0, n_drop = 0, n_spick = 0;
        ActionSite pick, del, drop, spick;
        for (const auto& [kind, site] : it->second) {
            switch (kind) {
                case ActionKind::Pickup: ++n_pick; pick = site; break;
                case ActionKind::Delivery: ++n_del; del = site; break;
                case ActionKind::StationDrop: ++n_drop; drop = site; break;
                case ActionKind::StationPick: ++n_spick; spick = site; break;
                default: break;
            }
        }
        const std::string tag = "request " + std::to_string(req.id);
        if (n_pick > 1 || n_del > 1 || n_drop > 1 || n_spick > 1) {
            flag(ViolationCode::RequestServedTwice, tag + " has duplicated actions", req.id);
            continue;
        }
        if (asg) {
            if (n_pick != 1 || n_del != 1 || n_drop != 1 || n_spick != 1) {
                flag(ViolationCode::RequestNotServed,
                     tag + " rides a scheduled leg but is missing leg-side actions", req.id);
                continue;
            }
            if (pick.route != drop.route)
                flag(ViolationCode::PairSplit, tag + ": pickup and station drop on different vehicles",
                     req.id);
            else if (pick.stop >= drop.stop)
                flag(ViolationCode::PairOrderViolated, tag + ": station drop precedes pickup", req.id);
            if (spick.route != del.route)
                flag(ViolationCode::PairSplit,
                     tag + ": station pickup and delivery on different vehicles", req.id);
            else if (spick.stop >= del.stop)
                flag(ViolationCode::PairOrderViolated, tag + ": delivery precedes station pickup",
                     req.id);
        } else {
            if (n_drop != 0 || n_spick != 0) {
                flag(ViolationCode::SlAssignmentInvalid,
                     tag + " has station actions but no scheduled-leg assignment", req.id);
                continue;
            }
            if (n_pick != 1 || n_del != 1) {
                flag(ViolationCode::RequestNotServed, tag + " not served exactly once", req.id);
                continue;
            }
            if (pick.route != del.route)
                flag(ViolationCode::PairSplit, tag + ": pickup and delivery on different vehicles",
                     req.id);
            else if (pick.stop >= del.stop)
                flag(ViolationCode::PairOrderViolated, tag + ": delivery precedes pickup", req.id);
        }
    }

    // Scheduled-line capacity per departure.
    std::map<std::pair<int, int>, double> dep_load;
    for (std::size_t i = 0; i < sol.sl_assignments.size(); ++i) {
        if (!sol.sl_assignments[i]) continue;
        const auto& a = *sol.sl_assignments[i];
        dep_load[{a.leg_index, a.departure_index}] += inst.requests[i].demand;
    }
    for (const auto& [key, q] : dep_load) {
        const auto& leg = inst.legs[static_cast<std::size_t>(key.first)];
        if (q > leg.capacity_per_departure + tol)
            flag(ViolationCode::SlCapacityExceeded,
                 "leg " + std::to_string(key.first) + " departure " + std::to_string(key.second) +
                     " carries " + fmt(q) + " over capacity " + fmt(leg.capacity_per_departure));
    }

    // Stored totals must be recomputable.
    double d = 0.0;
    for (const auto& route : sol.routes) {
        for (std::size_t si = 1; si < route.stops.size(); ++si)
            d += inst.dist(inst.pos_of(route.stops[si - 1].node_id),
                           inst.pos_of(route.stops[si].node_id));
    }
    if (std::abs(d - sol.total_distance) > tol)
        flag(ViolationCode::DistanceMismatch,
             "stored distance " + fmt(sol.total_distance) + " != recomputed " + fmt(d));

    double f = 0.0;
    for (std::size_t i = 0; i < sol.sl_assignments.size(); ++i)
        if (sol.sl_assignments[i])
            f += inst.legs[static_cast<std::size_t>(sol.sl_assignments[i]->leg_index)].tariff *
                 inst.requests[i].demand;
    if (std::abs(f - sol.total_flow_cost) > tol)
        flag(ViolationCode::FlowCostMismatch,
             "stored flow cost " + fmt(sol.total_flow_cost) + " != recomputed " + fmt(f));

    return rep;
}

} // namespace mshift
