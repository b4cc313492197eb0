#include "mshift/alns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mshift/errors.hpp"
#include "mshift/objective.hpp"
#include "mshift/validate.hpp"

namespace mshift::alns {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int node_at(const PlanRoute& rt, int k) {
    // task index, or -1 / size() for the depot bookends
    if (k < 0 || k >= static_cast<int>(rt.tasks.size())) return rt.depot_pos;
    return rt.tasks[static_cast<std::size_t>(k)].node_pos;
}

void reschedule(const Instance& inst, PlanRoute& rt) {
    const RouteTiming tm = schedule_route(inst, rt.depot_pos, rt.tasks);
    if (!tm.feasible) throw std::logic_error("plan route became unschedulable");
    rt.arrival = tm.arrival;
    rt.start = tm.start;
    rt.completion = tm.completion;
    rt.distance = tm.distance;
    rt.load_after.resize(rt.tasks.size());
    double load = 0.0;
    for (std::size_t k = 0; k < rt.tasks.size(); ++k) {
        load += rt.tasks[k].load_delta;
        rt.load_after[k] = load;
    }
}

struct PairEval {
    bool ok = false;
    double delta_dist = 0.0;
    double b_completion = 0.0; // completion time of the second inserted task
};

// Simulates inserting A before slot i and B before slot j (i <= j) of the
// route. Uses the cached schedule up to i, then propagates until the time
// shift is absorbed. Net load change after B is zero for every pair we insert,
// so only time needs propagation past j.
PairEval eval_pair_insert(const Instance& inst, const PlanRoute& rt, int i, int j,
                          const TaskSpec& A, const TaskSpec& B) {
    const int m = static_cast<int>(rt.tasks.size());
    const double cap = inst.fleet.capacity;
    VehState st;
    if (i == 0) {
        st = {rt.depot_pos, inst.horizon.earliest, 0.0};
    } else {
        st = {rt.tasks[static_cast<std::size_t>(i - 1)].node_pos,
              rt.completion[static_cast<std::size_t>(i - 1)],
              rt.load_after[static_cast<std::size_t>(i - 1)]};
    }
    if (!advance(inst, cap, st, A)) return {};
    for (int k = i; k < j; ++k)
        if (!advance(inst, cap, st, rt.tasks[static_cast<std::size_t>(k)])) return {};
    if (!advance(inst, cap, st, B)) return {};

    PairEval ev;
    ev.b_completion = st.time;

    bool absorbed = false;
    for (int k = j; k < m; ++k) {
        if (!advance(inst, cap, st, rt.tasks[static_cast<std::size_t>(k)])) return {};
        if (st.time <= rt.completion[static_cast<std::size_t>(k)]) {
            absorbed = true;
            break;
        }
    }
    if (!absorbed && st.time + inst.travel_time(st.node_pos, rt.depot_pos) > inst.horizon.latest)
        return {};

    if (i == j) {
        ev.delta_dist = inst.dist(node_at(rt, i - 1), A.node_pos) +
                        inst.dist(A.node_pos, B.node_pos) + inst.dist(B.node_pos, node_at(rt, i)) -
                        inst.dist(node_at(rt, i - 1), node_at(rt, i));
    } else {
        ev.delta_dist = inst.dist(node_at(rt, i - 1), A.node_pos) +
                        inst.dist(A.node_pos, node_at(rt, i)) -
                        inst.dist(node_at(rt, i - 1), node_at(rt, i)) +
                        inst.dist(node_at(rt, j - 1), B.node_pos) +
                        inst.dist(B.node_pos, node_at(rt, j)) -
                        inst.dist(node_at(rt, j - 1), node_at(rt, j));
    }
    ev.ok = true;
    return ev;
}

TaskSpec pickup_task(const Instance& inst, int r) {
    const auto& req = inst.requests[static_cast<std::size_t>(r)];
    return {inst.pos_of(req.pickup_node), req.pickup_tw.earliest, req.pickup_tw.latest,
            req.service_time, req.demand, ActionKind::Pickup, r};
}

TaskSpec delivery_task(const Instance& inst, int r) {
    const auto& req = inst.requests[static_cast<std::size_t>(r)];
    return {inst.pos_of(req.delivery_node), req.delivery_tw.earliest, req.delivery_tw.latest,
            req.service_time, -req.demand, ActionKind::Delivery, r};
}

int active_routes(const Plan& plan) { return static_cast<int>(plan.routes.size()); }

// Best (A, B) slot pair within one existing route.
struct Placement {
    bool found = false;
    int i = 0, j = 0;
    double delta_dist = kInf;
    double b_completion = 0.0;
};

Placement best_placement(const Instance& inst, const PlanRoute& rt, const TaskSpec& A,
                         const TaskSpec& B) {
    Placement best;
    const int m = static_cast<int>(rt.tasks.size());
    for (int i = 0; i <= m; ++i)
        for (int j = i; j <= m; ++j) {
            const PairEval ev = eval_pair_insert(inst, rt, i, j, A, B);
            if (ev.ok && ev.delta_dist < best.delta_dist) {
                best = {true, i, j, ev.delta_dist, ev.b_completion};
            }
        }
    return best;
}

PlanRoute fresh_route(int depot_pos) {
    PlanRoute rt;
    rt.depot_pos = depot_pos;
    return rt;
}

// Candidate list at route granularity: per existing route the best slot pair,
// plus the best new-route option (cheapest depot). Used by both repairs.
std::vector<Insertion> direct_candidates(const Plan& plan, int req_pos, const Policy& policy) {
    const Instance& inst = *plan.inst;
    const TaskSpec A = pickup_task(inst, req_pos);
    const TaskSpec B = delivery_task(inst, req_pos);
    const double road_rate = (1.0 + policy.tax) * inst.phi;
    std::vector<Insertion> out;

    for (int ri = 0; ri < static_cast<int>(plan.routes.size()); ++ri) {
        const Placement pl = best_placement(inst, plan.routes[static_cast<std::size_t>(ri)], A, B);
        if (!pl.found) continue;
        Insertion ins;
        ins.kind = ModeKind::Direct;
        ins.route_a = ri;
        ins.slot_a1 = pl.i;
        ins.slot_a2 = pl.j;
        ins.delta_distance = pl.delta_dist;
        ins.delta_cost = road_rate * pl.delta_dist;
        out.push_back(ins);
    }
    if (active_routes(plan) < inst.fleet.n_vehicles) {
        Insertion best;
        best.delta_cost = kInf;
        for (int depot : inst.depot_positions()) {
            const PlanRoute rt = fresh_route(depot);
            const PairEval ev = eval_pair_insert(inst, rt, 0, 0, A, B);
            if (!ev.ok) continue;
            if (road_rate * ev.delta_dist < best.delta_cost) {
                best.kind = ModeKind::Direct;
                best.route_a = -1;
                best.depot_a = depot;
                best.slot_a1 = best.slot_a2 = 0;
                best.delta_distance = ev.delta_dist;
                best.delta_cost = road_rate * ev.delta_dist;
            }
        }
        if (best.delta_cost < kInf) out.push_back(best);
    }
    return out;
}

} // namespace

double Plan::cost(const Policy& p) const { return policy_cost(inst->phi, p, total_distance, total_flow); }

int Plan::n_served() const {
    int n = 0;
    for (const auto& m : modes)
        if (m.kind != ModeKind::Unserved) ++n;
    return n;
}

Plan empty_plan(const Instance& inst) {
    Plan plan;
    plan.inst = &inst;
    plan.modes.assign(static_cast<std::size_t>(inst.n_requests()), RequestMode{});
    plan.departure_load.resize(inst.legs.size());
    for (std::size_t li = 0; li < inst.legs.size(); ++li)
        plan.departure_load[li].assign(inst.legs[li].departures.size(), 0.0);
    return plan;
}

std::vector<Insertion> sl_insertion_candidates(const Plan& plan, int req_pos, const Policy& policy) {
    const Instance& inst = *plan.inst;
    const auto& req = inst.requests[static_cast<std::size_t>(req_pos)];
    const double road_rate = (1.0 + policy.tax) * inst.phi;
    std::vector<Insertion> out;

    for (int li = 0; li < static_cast<int>(inst.legs.size()); ++li) {
        const auto& leg = inst.legs[static_cast<std::size_t>(li)];
        if (req.demand > leg.capacity_per_departure + 1e-9) continue;
        const int station_i = inst.pos_of(leg.from_station);
        const int station_j = inst.pos_of(leg.to_station);
        const double flow_term = (1.0 - policy.subsidy) * leg.tariff * req.demand;

        const TaskSpec pick = pickup_task(inst, req_pos);
        // drop window capped later, once the departure is known; for placement
        // search the only hard bound is the horizon
        TaskSpec drop{station_i, inst.horizon.earliest, inst.horizon.latest, req.service_time,
                      -req.demand, ActionKind::StationDrop, req_pos};

        // First-mile pass: the cheapest placement per reachable departure.
        struct BestA {
            double delta = kInf;
            int route = -1; // -1 = new route
            int depot = -1;
            int i = 0, j = 0;
        };
        std::vector<std::pair<int, BestA>> best_a; // (departure idx, best) ascending

        auto earliest_departure = [&](double ready) -> int {
            for (int w = 0; w < static_cast<int>(leg.departures.size()); ++w) {
                if (leg.departures[static_cast<std::size_t>(w)] < ready) continue;
                if (plan.departure_load[static_cast<std::size_t>(li)][static_cast<std::size_t>(w)] +
                        req.demand >
                    leg.capacity_per_departure + 1e-9)
                    continue;
                return w;
            }
            return -1;
        };
        auto note_a = [&](int w, const BestA& cand) {
            for (auto& [dep, cur] : best_a)
                if (dep == w) {
                    if (cand.delta < cur.delta) cur = cand;
                    return;
                }
            best_a.emplace_back(w, cand);
        };

        for (int ri = 0; ri < static_cast<int>(plan.routes.size()); ++ri) {
            const PlanRoute& rt = plan.routes[static_cast<std::size_t>(ri)];
            const int m = static_cast<int>(rt.tasks.size());
            for (int i = 0; i <= m; ++i)
                for (int j = i; j <= m; ++j) {
                    const PairEval ev = eval_pair_insert(inst, rt, i, j, pick, drop);
                    if (!ev.ok) continue;
                    const int w = earliest_departure(ev.b_completion);
                    if (w < 0) continue;
                    note_a(w, {ev.delta_dist, ri, -1, i, j});
                }
        }
        if (active_routes(plan) < inst.fleet.n_vehicles) {
            for (int depot : inst.depot_positions()) {
                const PlanRoute rt = fresh_route(depot);
                const PairEval ev = eval_pair_insert(inst, rt, 0, 0, pick, drop);
                if (!ev.ok) continue;
                const int w = earliest_departure(ev.b_completion);
                if (w < 0) continue;
                note_a(w, {ev.delta_dist, -1, depot, 0, 0});
            }
        }
        std::sort(best_a.begin(), best_a.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });

        // Last-mile pass per departure.
        for (const auto& [w, a] : best_a) {
            const double dep_time = leg.departures[static_cast<std::size_t>(w)];
            const TaskSpec spick{station_j, dep_time + leg.travel_time, inst.horizon.latest,
                                 req.service_time, req.demand, ActionKind::StationPick, req_pos};
            const TaskSpec del = delivery_task(inst, req_pos);

            // the route as it would look with the first mile applied
            PlanRoute merged;
            const bool a_new_route = a.route < 0;
            if (!a_new_route) {
                merged = plan.routes[static_cast<std::size_t>(a.route)];
            } else {
                merged = fresh_route(a.depot);
            }
            TaskSpec drop_w = drop;
            drop_w.win_hi = dep_time - req.service_time;
            merged.tasks.insert(merged.tasks.begin() + a.i, pick);
            merged.tasks.insert(merged.tasks.begin() + (a.j + 1), drop_w);
            reschedule(inst, merged);

            double best_b = kInf;
            Insertion ins;
            for (int ri = 0; ri < static_cast<int>(plan.routes.size()); ++ri) {
                const bool same = (!a_new_route && ri == a.route);
                const PlanRoute& rt =
                    same ? merged : plan.routes[static_cast<std::size_t>(ri)];
                const Placement pl = best_placement(inst, rt, spick, del);
                if (pl.found && pl.delta_dist < best_b) {
                    best_b = pl.delta_dist;
                    ins.route_b = ri;
                    ins.depot_b = -1;
                    ins.slot_b1 = pl.i;
                    ins.slot_b2 = pl.j;
                }
            }
            const int used = active_routes(plan) + (a_new_route ? 1 : 0);
            if (used < inst.fleet.n_vehicles) {
                for (int depot : inst.depot_positions()) {
                    const PlanRoute rt = fresh_route(depot);
                    const PairEval ev = eval_pair_insert(inst, rt, 0, 0, spick, del);
                    if (ev.ok && ev.delta_dist < best_b) {
                        best_b = ev.delta_dist;
                        ins.route_b = -1;
                        ins.depot_b = depot;
                        ins.slot_b1 = ins.slot_b2 = 0;
                    }
                }
            }
            if (best_b == kInf) continue;

            ins.kind = ModeKind::Scheduled;
            ins.leg = li;
            ins.departure = w;
            ins.route_a = a.route;
            ins.depot_a = a.depot;
            ins.slot_a1 = a.i;
            ins.slot_a2 = a.j;
            ins.delta_distance = a.delta + best_b;
            ins.delta_cost = road_rate * ins.delta_distance + flow_term;
            out.push_back(ins);
        }
    }
    return out;
}

std::optional<Insertion> best_direct_insertion(const Plan& plan, int req_pos, const Policy& policy) {
    const auto cands = direct_candidates(plan, req_pos, policy);
    if (cands.empty()) return std::nullopt;
    const Insertion* best = &cands.front();
    for (const auto& c : cands)
        if (c.delta_cost < best->delta_cost) best = &c;
    return *best;
}

std::optional<Insertion> best_insertion(const Plan& plan, int req_pos, const Policy& policy) {
    std::optional<Insertion> best = best_direct_insertion(plan, req_pos, policy);
    for (const auto& c : sl_insertion_candidates(plan, req_pos, policy))
        if (!best || c.delta_cost < best->delta_cost) best = c;
    return best;
}

void apply_insertion(Plan& plan, int req_pos, const Insertion& ins) {
    const Instance& inst = *plan.inst;
    const auto& req = inst.requests[static_cast<std::size_t>(req_pos)];

    auto route_for = [&](int route_idx, int depot_pos) -> int {
        if (route_idx >= 0) return route_idx;
        plan.routes.push_back(fresh_route(depot_pos));
        return static_cast<int>(plan.routes.size()) - 1;
    };

    if (ins.kind == ModeKind::Direct) {
        const int ri = route_for(ins.route_a, ins.depot_a);
        PlanRoute& rt = plan.routes[static_cast<std::size_t>(ri)];
        rt.tasks.insert(rt.tasks.begin() + ins.slot_a1, pickup_task(inst, req_pos));
        rt.tasks.insert(rt.tasks.begin() + (ins.slot_a2 + 1), delivery_task(inst, req_pos));
        const double before = rt.distance;
        reschedule(inst, rt);
        plan.total_distance += rt.distance - before;
        plan.modes[static_cast<std::size_t>(req_pos)] = {ModeKind::Direct, -1, -1};
        return;
    }

    const auto& leg = inst.legs[static_cast<std::size_t>(ins.leg)];
    const double dep_time = leg.departures[static_cast<std::size_t>(ins.departure)];
    const TaskSpec pick = pickup_task(inst, req_pos);
    const TaskSpec drop{inst.pos_of(leg.from_station), inst.horizon.earliest,
                        dep_time - req.service_time, req.service_time, -req.demand,
                        ActionKind::StationDrop, req_pos};
    const TaskSpec spick{inst.pos_of(leg.to_station), dep_time + leg.travel_time,
                         inst.horizon.latest, req.service_time, req.demand,
                         ActionKind::StationPick, req_pos};
    const TaskSpec del = delivery_task(inst, req_pos);

    const int ra = route_for(ins.route_a, ins.depot_a);
    {
        PlanRoute& rt = plan.routes[static_cast<std::size_t>(ra)];
        rt.tasks.insert(rt.tasks.begin() + ins.slot_a1, pick);
        rt.tasks.insert(rt.tasks.begin() + (ins.slot_a2 + 1), drop);
        const double before = rt.distance;
        reschedule(inst, rt);
        plan.total_distance += rt.distance - before;
    }
    const int rb = (ins.route_b >= 0) ? ins.route_b : route_for(-1, ins.depot_b);
    {
        PlanRoute& rt = plan.routes[static_cast<std::size_t>(rb)];
        rt.tasks.insert(rt.tasks.begin() + ins.slot_b1, spick);
        rt.tasks.insert(rt.tasks.begin() + (ins.slot_b2 + 1), del);
        const double before = rt.distance;
        reschedule(inst, rt);
        plan.total_distance += rt.distance - before;
    }
    plan.departure_load[static_cast<std::size_t>(ins.leg)][static_cast<std::size_t>(ins.departure)] +=
        req.demand;
    plan.total_flow += leg.tariff * req.demand;
    plan.modes[static_cast<std::size_t>(req_pos)] = {ModeKind::Scheduled, ins.leg, ins.departure};
}

void remove_request(Plan& plan, int req_pos) {
    const Instance& inst = *plan.inst;
    RequestMode& mode = plan.modes[static_cast<std::size_t>(req_pos)];
    if (mode.kind == ModeKind::Unserved) return;

    for (int ri = static_cast<int>(plan.routes.size()) - 1; ri >= 0; --ri) {
        PlanRoute& rt = plan.routes[static_cast<std::size_t>(ri)];
        bool touched = false;
        for (std::size_t k = rt.tasks.size(); k-- > 0;) {
            if (rt.tasks[k].req_pos == req_pos) {
                rt.tasks.erase(rt.tasks.begin() + static_cast<std::ptrdiff_t>(k));
                touched = true;
            }
        }
        if (!touched) continue;
        const double before = rt.distance;
        if (rt.tasks.empty()) {
            plan.total_distance -= before;
            plan.routes.erase(plan.routes.begin() + ri);
        } else {
            reschedule(inst, rt);
            plan.total_distance += rt.distance - before;
        }
    }
    if (mode.kind == ModeKind::Scheduled) {
        const auto& leg = inst.legs[static_cast<std::size_t>(mode.leg)];
        const double q = inst.requests[static_cast<std::size_t>(req_pos)].demand;
        plan.departure_load[static_cast<std::size_t>(mode.leg)]
                           [static_cast<std::size_t>(mode.departure)] -= q;
        plan.total_flow -= leg.tariff * q;
    }
    mode = RequestMode{};
}

// ---- conversion ---------------------------------------------------------------

Solution plan_to_solution(const Plan& plan) {
    const Instance& inst = *plan.inst;
    Solution sol;
    sol.sl_assignments.assign(static_cast<std::size_t>(inst.n_requests()), std::nullopt);
    for (int r = 0; r < inst.n_requests(); ++r) {
        const auto& m = plan.modes[static_cast<std::size_t>(r)];
        if (m.kind == ModeKind::Scheduled)
            sol.sl_assignments[static_cast<std::size_t>(r)] = SlAssignment{m.leg, m.departure};
    }
    for (const auto& rt : plan.routes) {
        if (rt.tasks.empty()) continue;
        Route route;
        route.depot_node = inst.nodes[static_cast<std::size_t>(rt.depot_pos)].id;
        route.distance = rt.distance;
        Stop first;
        first.node_id = route.depot_node;
        first.arrival = first.start = first.departure = inst.horizon.earliest;
        route.stops.push_back(first);
        for (std::size_t k = 0; k < rt.tasks.size(); ++k) {
            const auto& t = rt.tasks[k];
            Stop s;
            s.node_id = inst.nodes[static_cast<std::size_t>(t.node_pos)].id;
            s.action = t.action;
            s.request_id = inst.requests[static_cast<std::size_t>(t.req_pos)].id;
            s.arrival = rt.arrival[k];
            s.start = rt.start[k];
            s.departure = rt.completion[k];
            s.load_after = rt.load_after[k];
            route.stops.push_back(s);
        }
        const auto& last_task = rt.tasks.back();
        Stop last;
        last.node_id = route.depot_node;
        last.arrival = rt.completion.back() + inst.travel_time(last_task.node_pos, rt.depot_pos);
        last.start = last.departure = last.arrival;
        route.stops.push_back(last);
        sol.routes.push_back(std::move(route));
    }
    sol.total_distance = plan.total_distance;
    sol.total_flow_cost = plan.total_flow;
    sol.feasible = true;
    return sol;
}

Plan plan_from_solution(const Instance& inst, const Solution& sol) {
    Plan plan = empty_plan(inst);
    if (sol.sl_assignments.size() != static_cast<std::size_t>(inst.n_requests()))
        throw InfeasibleError("warm start does not match the instance's request count");

    for (const auto& route : sol.routes) {
        if (route.stops.size() <= 2) continue;
        PlanRoute rt = fresh_route(inst.pos_of(route.depot_node));
        for (const auto& stop : route.stops) {
            if (stop.action == ActionKind::None) continue;
            int req_pos = -1;
            for (int r = 0; r < inst.n_requests(); ++r)
                if (inst.requests[static_cast<std::size_t>(r)].id == stop.request_id) {
                    req_pos = r;
                    break;
                }
            if (req_pos < 0) throw InfeasibleError("warm start cites an unknown request");
            const auto& req = inst.requests[static_cast<std::size_t>(req_pos)];
            const auto& asg = sol.sl_assignments[static_cast<std::size_t>(req_pos)];
            TaskSpec t;
            switch (stop.action) {
                case ActionKind::Pickup: t = pickup_task(inst, req_pos); break;
                case ActionKind::Delivery: t = delivery_task(inst, req_pos); break;
                case ActionKind::StationDrop: {
                    if (!asg) throw InfeasibleError("warm start drop without an assignment");
                    const auto& leg = inst.legs[static_cast<std::size_t>(asg->leg_index)];
                    const double dep = leg.departures[static_cast<std::size_t>(asg->departure_index)];
                    t = {inst.pos_of(leg.from_station), inst.horizon.earliest,
                         dep - req.service_time, req.service_time, -req.demand,
                         ActionKind::StationDrop, req_pos};
                    break;
                }
                case ActionKind::StationPick: {
                    if (!asg) throw InfeasibleError("warm start pick without an assignment");
                    const auto& leg = inst.legs[static_cast<std::size_t>(asg->leg_index)];
                    const double dep = leg.departures[static_cast<std::size_t>(asg->departure_index)];
                    t = {inst.pos_of(leg.to_station), dep + leg.travel_time, inst.horizon.latest,
                         req.service_time, req.demand, ActionKind::StationPick, req_pos};
                    break;
                }
                default: continue;
            }
            rt.tasks.push_back(t);
        }
        if (rt.tasks.empty()) continue;
        const RouteTiming tm = schedule_route(inst, rt.depot_pos, rt.tasks);
        if (!tm.feasible) throw InfeasibleError("warm start solution does not schedule cleanly");
        plan.routes.push_back(std::move(rt));
        reschedule(inst, plan.routes.back());
        plan.total_distance += plan.routes.back().distance;
    }

    for (int r = 0; r < inst.n_requests(); ++r) {
        const auto& asg = sol.sl_assignments[static_cast<std::size_t>(r)];
        if (asg) {
            const auto& leg = inst.legs[static_cast<std::size_t>(asg->leg_index)];
            const double q = inst.requests[static_cast<std::size_t>(r)].demand;
            plan.modes[static_cast<std::size_t>(r)] = {ModeKind::Scheduled, asg->leg_index,
                                                       asg->departure_index};
            plan.departure_load[static_cast<std::size_t>(asg->leg_index)]
                               [static_cast<std::size_t>(asg->departure_index)] += q;
            plan.total_flow += leg.tariff * q;
        } else {
            plan.modes[static_cast<std::size_t>(r)] = {ModeKind::Direct, -1, -1};
        }
    }
    return plan;
}

// ---- destroy ------------------------------------------------------------------

namespace {

std::vector<int> served_positions(const Plan& plan) {
    std::vector<int> out;
    for (int r = 0; r < static_cast<int>(plan.modes.size()); ++r)
        if (plan.modes[static_cast<std::size_t>(r)].kind != ModeKind::Unserved) out.push_back(r);
    return out;
}

// Exact cost saving of taking one request out of the plan.
double removal_saving(const Plan& plan, int req_pos, const Policy& policy) {
    const Instance& inst = *plan.inst;
    double delta_d = 0.0;
    for (const auto& rt : plan.routes) {
        bool touched = false;
        for (const auto& t : rt.tasks)
            if (t.req_pos == req_pos) {
                touched = true;
                break;
            }
        if (!touched) continue;
        double kept = 0.0;
        int prev = rt.depot_pos;
        for (const auto& t : rt.tasks) {
            if (t.req_pos == req_pos) continue;
            kept += inst.dist(prev, t.node_pos);
            prev = t.node_pos;
        }
        kept += inst.dist(prev, rt.depot_pos);
        delta_d += rt.distance - kept;
    }
    double saving = (1.0 + policy.tax) * inst.phi * delta_d;
    const auto& mode = plan.modes[static_cast<std::size_t>(req_pos)];
    if (mode.kind == ModeKind::Scheduled)
        saving += (1.0 - policy.subsidy) *
                  inst.legs[static_cast<std::size_t>(mode.leg)].tariff *
                  inst.requests[static_cast<std::size_t>(req_pos)].demand;
    return saving;
}

} // namespace

std::vector<int> destroy_random(Plan& plan, int k, Rng& rng) {
    std::vector<int> served = served_positions(plan);
    rng.shuffle(served);
    if (static_cast<int>(served.size()) > k) served.resize(static_cast<std::size_t>(k));
    for (int r : served) remove_request(plan, r);
    std::sort(served.begin(), served.end());
    return served;
}

std::vector<int> destroy_worst(Plan& plan, int k, const Policy& policy, Rng& rng) {
    (void)rng;
    std::vector<int> removed;
    for (int round = 0; round < k; ++round) {
        const std::vector<int> served = served_positions(plan);
        if (served.empty()) break;
        int pick = -1;
        double best = -kInf;
        for (int r : served) {
            const double s = removal_saving(plan, r, policy);
            if (s > best) {
                best = s;
                pick = r;
            }
        }
        remove_request(plan, pick);
        removed.push_back(pick);
    }
    std::sort(removed.begin(), removed.end());
    return removed;
}

std::vector<int> destroy_related(Plan& plan, int k, Rng& rng) {
    const Instance& inst = *plan.inst;
    std::vector<int> served = served_positions(plan);
    if (served.empty() || k <= 0) return {};
    std::vector<int> removed;
    const int seed_pick = served[static_cast<std::size_t>(rng.next_below(served.size()))];
    remove_request(plan, seed_pick);
    removed.push_back(seed_pick);

    auto relatedness = [&](int r1, int r2) {
        const auto& a = inst.requests[static_cast<std::size_t>(r1)];
        const auto& b = inst.requests[static_cast<std::size_t>(r2)];
        return inst.dist_by_id(a.pickup_node, b.pickup_node) +
               inst.dist_by_id(a.delivery_node, b.delivery_node) +
               0.2 * (std::abs(a.pickup_tw.earliest - b.pickup_tw.earliest) +
                      std::abs(a.delivery_tw.earliest - b.delivery_tw.earliest));
    };

    while (static_cast<int>(removed.size()) < k) {
        const std::vector<int> left = served_positions(plan);
        if (left.empty()) break;
        const int anchor = removed[static_cast<std::size_t>(rng.next_below(removed.size()))];
        int pick = left.front();
        double best = kInf;
        for (int r : left) {
            const double rel = relatedness(anchor, r);
            if (rel < best) {
                best = rel;
                pick = r;
            }
        }
        remove_request(plan, pick);
        removed.push_back(pick);
    }
    std::sort(removed.begin(), removed.end());
    return removed;
}

std::vector<int> destroy_sl_focused(Plan& plan, int k, Rng& rng) {
    std::vector<int> on_sl, off_sl;
    for (int r = 0; r < static_cast<int>(plan.modes.size()); ++r) {
        const auto& m = plan.modes[static_cast<std::size_t>(r)];
        if (m.kind == ModeKind::Scheduled) on_sl.push_back(r);
        else if (m.kind == ModeKind::Direct) off_sl.push_back(r);
    }
    rng.shuffle(on_sl);
    rng.shuffle(off_sl);
    std::vector<int> removed;
    for (int r : on_sl) {
        if (static_cast<int>(removed.size()) >= k) break;
        remove_request(plan, r);
        removed.push_back(r);
    }
    for (int r : off_sl) {
        if (static_cast<int>(removed.size()) >= k) break;
        remove_request(plan, r);
        removed.push_back(r);
    }
    std::sort(removed.begin(), removed.end());
    return removed;
}

// ---- repair -------------------------------------------------------------------

namespace {

std::vector<Insertion> all_candidates(const Plan& plan, int req_pos, const Policy& policy) {
    std::vector<Insertion> cands = direct_candidates(plan, req_pos, policy);
    for (auto& c : sl_insertion_candidates(plan, req_pos, policy)) cands.push_back(std::move(c));
    return cands;
}

double noisy_rank(double delta_cost, Rng* rng, double span) {
    if (!rng || span <= 0.0) return delta_cost;
    return delta_cost + span * (2.0 * rng->next_real() - 1.0);
}

} // namespace

bool repair_greedy(Plan& plan, std::vector<int> removed, const Policy& policy,
                   Rng* noise_rng, double noise_span) {
    std::sort(removed.begin(), removed.end());
    while (!removed.empty()) {
        int best_req = -1;
        std::size_t best_at = 0;
        Insertion best_ins;
        double best_rank = kInf;
        for (std::size_t k = 0; k < removed.size(); ++k) {
            for (const auto& c : all_candidates(plan, removed[k], policy)) {
                const double rank = noisy_rank(c.delta_cost, noise_rng, noise_span);
                if (rank < best_rank) {
                    best_rank = rank;
                    best_ins = c;
                    best_req = removed[k];
                    best_at = k;
                }
            }
        }
        if (best_req < 0) return false;
        apply_insertion(plan, best_req, best_ins);
        removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(best_at));
    }
    return true;
}

bool repair_regret2(Plan& plan, std::vector<int> removed, const Policy& policy,
                    Rng* noise_rng, double noise_span) {
    std::sort(removed.begin(), removed.end());
    while (!removed.empty()) {
        int pick = -1;
        std::size_t pick_at = 0;
        Insertion pick_ins;
        double pick_regret = -kInf;
        double pick_best = kInf;
        for (std::size_t k = 0; k < removed.size(); ++k) {
            const auto cands = all_candidates(plan, removed[k], policy);
            if (cands.empty()) return false; // someone is uninsertable right now
            double c1 = kInf, c2 = kInf;
            const Insertion* best = nullptr;
            for (const auto& c : cands) {
                const double rank = noisy_rank(c.delta_cost, noise_rng, noise_span);
                if (rank < c1) {
                    c2 = c1;
                    c1 = rank;
                    best = &c;
                } else if (rank < c2) {
                    c2 = rank;
                }
            }
            const double regret = (c2 == kInf) ? kInf : c2 - c1;
            const bool take = regret > pick_regret ||
                              (regret == pick_regret && c1 < pick_best);
            if (take) {
                pick_regret = regret;
                pick_best = c1;
                pick = removed[k];
                pick_at = k;
                pick_ins = *best;
            }
        }
        apply_insertion(plan, pick, pick_ins);
        removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(pick_at));
    }
    return true;
}

// ---- annealing / weights --------------------------------------------------------

bool accept(double candidate_cost, double current_cost, double temperature, Rng& rng) {
    if (candidate_cost <= current_cost) return true;
    if (temperature <= 0.0) return false;
    return rng.next_real() < std::exp((current_cost - candidate_cost) / temperature);
}

void update_weights(std::vector<double>& weights, const std::vector<double>& scores,
                    const std::vector<int>& uses, double reaction_factor) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (uses[i] <= 0) continue;
        weights[i] = (1.0 - reaction_factor) * weights[i] +
                     reaction_factor * scores[i] / static_cast<double>(uses[i]);
    }
}

// ---- top level -------------------------------------------------------------------

Plan construct_initial(const Instance& inst, const Policy& policy, Rng& rng) {
    std::vector<int> failed;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Plan plan = empty_plan(inst);
        std::vector<int> order(static_cast<std::size_t>(inst.n_requests()));
        for (int r = 0; r < inst.n_requests(); ++r) order[static_cast<std::size_t>(r)] = r;
        rng.shuffle(order);
        failed.clear();
        for (int r : order) {
            const auto ins = best_insertion(plan, r, policy);
            if (ins)
                apply_insertion(plan, r, *ins);
            else
                failed.push_back(r);
        }
        if (failed.empty()) return plan;
    }
    std::sort(failed.begin(), failed.end());
    std::ostringstream os;
    os << "no feasible insertion found for request id(s):";
    for (int r : failed) os << ' ' << inst.requests[static_cast<std::size_t>(r)].id;
    throw InfeasibleError(os.str());
}

SolverRun solve(const Instance& inst, const Policy& policy, const AlnsParams& params,
                const Solution* warm_start) {
    if (!policy.valid()) throw InvalidInstanceError("invalid policy");
    Rng rng(params.seed);

    SolverRun run;
    if (inst.n_requests() == 0) {
        Plan plan = empty_plan(inst);
        run.best = plan_to_solution(plan);
        run.best_cost = 0.0;
        return run;
    }

    Plan cur = warm_start ? plan_from_solution(inst, *warm_start)
                          : construct_initial(inst, policy, rng);
    Plan best = cur;
    double cur_cost = cur.cost(policy);
    double best_cost = cur_cost;

    const int n_destroy = 4, n_repair = 2;
    std::vector<double> wd(n_destroy, 1.0), wr(n_repair, 1.0);
    std::vector<double> sd(n_destroy, 0.0), sr(n_repair, 0.0);
    std::vector<int> ud(n_destroy, 0), ur(n_repair, 0);

    auto roulette = [&](const std::vector<double>& w) {
        double total = 0.0;
        for (double v : w) total += v;
        const double u = rng.next_real() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(w.size()) - 1;
    };

    const int n = inst.n_requests();
    const int k_lo = std::max(1, static_cast<int>(params.remove_frac_min * n));
    // Round the upper bound up and keep a floor of four so small instances can
    // be torn down completely; rebuilding from scratch is the only way a
    // single-route plan changes depot or sheds a committed line booking.
    const int k_hi = std::max(k_lo,
        std::min(n, std::max(4, static_cast<int>(std::ceil(params.remove_frac_max * n)))));

    // Noise scale for randomized repairs: a fraction of the dearest road hop,
    // in cost units under the active policy.
    double max_hop = 0.0;
    const int n_nodes = static_cast<int>(inst.nodes.size());
    for (int a = 0; a < n_nodes; ++a)
        for (int b = a + 1; b < n_nodes; ++b) max_hop = std::max(max_hop, inst.dist(a, b));
    const double noise_span = params.noise_amp * (1.0 + policy.tax) * inst.phi * max_hop;

    double temp = params.start_temp_ratio * std::max(best_cost, 1e-9) / std::log(2.0);

    for (int iter = 1; iter <= params.max_iterations; ++iter) {
        const int d_op = roulette(wd);
        const int r_op = roulette(wr);
        const int k = rng.next_int(k_lo, k_hi);
        const bool with_noise = noise_span > 0.0 && rng.next_real() < params.noise_prob;
        Rng* noise_rng = with_noise ? &rng : nullptr;

        Plan cand = cur;
        std::vector<int> removed;
        switch (d_op) {
            case 0: removed = destroy_random(cand, k, rng); break;
            case 1: removed = destroy_worst(cand, k, policy, rng); break;
            case 2: removed = destroy_related(cand, k, rng); break;
            default: removed = destroy_sl_focused(cand, k, rng); break;
        }
        const bool ok = (r_op == 0)
                            ? repair_greedy(cand, removed, policy, noise_rng, noise_span)
                            : repair_regret2(cand, std::move(removed), policy, noise_rng, noise_span);
        ++ud[static_cast<std::size_t>(d_op)];
        ++ur[static_cast<std::size_t>(r_op)];

        bool accepted = false;
        if (ok) {
            const double cand_cost = cand.cost(policy);
            accepted = accept(cand_cost, cur_cost, temp, rng);
            double score = 0.0;
            if (cand_cost < best_cost)
                score = params.score_new_best;
            else if (cand_cost < cur_cost)
                score = params.score_improving;
            else if (accepted)
                score = params.score_accepted;
            sd[static_cast<std::size_t>(d_op)] += score;
            sr[static_cast<std::size_t>(r_op)] += score;

            if (accepted) {
                if (params.validate_each_accept) {
                    const Solution s = plan_to_solution(cand);
                    const ValidationReport rep = validate_solution(inst, s);
                    if (!rep.ok())
                        throw std::logic_error("accepted plan failed validation: " +
                                               rep.violations.front().detail);
                }
                cur = std::move(cand);
                cur_cost = cand_cost;
                if (cur_cost < best_cost) {
                    best = cur;
                    best_cost = cur_cost;
                }
            }
        } else {
            // a request became uninsertable under this destruction; retreat
            cur = best;
            cur_cost = best_cost;
        }

        if (params.keep_trace)
            run.trace.push_back({iter, cur_cost, best_cost, d_op, r_op, accepted});

        temp = std::max(temp * params.cooling, 1e-12);
        if (iter % params.segment_length == 0) {
            update_weights(wd, sd, ud, params.reaction_factor);
            update_weights(wr, sr, ur, params.reaction_factor);
            std::fill(sd.begin(), sd.end(), 0.0);
            std::fill(sr.begin(), sr.end(), 0.0);
            std::fill(ud.begin(), ud.end(), 0);
            std::fill(ur.begin(), ur.end(), 0);
        }
        run.iterations = iter;
    }

    run.best = plan_to_solution(best);
    run.best_cost = best_cost;
    return run;
}

} // namespace mshift::alns
