#include "mshift/oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "mshift/errors.hpp"
#include "mshift/objective.hpp"
#include "mshift/schedule.hpp"

namespace mshift::oracle {

ArgminResult finite_argmin(const std::vector<Alternative>& alts, double phi, const Policy& policy) {
    if (alts.empty()) throw InvalidInstanceError("finite_argmin on an empty alternative list");
    ArgminResult best;
    for (int i = 0; i < static_cast<int>(alts.size()); ++i) {
        const auto& a = alts[static_cast<std::size_t>(i)];
        const double c = policy_cost(phi, policy, a.distance, a.flow_cost);
        if (best.index < 0) {
            best = {i, c};
            continue;
        }
        const auto& b = alts[static_cast<std::size_t>(best.index)];
        const bool better =
            c < best.cost ||
            (c == best.cost && (a.distance < b.distance ||
                                (a.distance == b.distance && a.flow_cost < b.flow_cost)));
        if (better) best = {i, c};
    }
    return best;
}

namespace {

// One request's service mode: pure road, or one scheduled leg + departure.
struct Mode {
    int leg = -1; // -1 = direct
    int departure = -1;
};

// A (first, second) stop pair that must ride the same vehicle in this order.
struct PairDef {
    TaskSpec a, b;
    int req_pos = -1;
};

struct Label {
    std::uint32_t mask = 0; // tasks done
    std::int16_t last = -1;
    std::int16_t depot = -1; // index into depot list
    double dist = 0.0;
    double time = 0.0;
    std::int32_t parent = -1;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RouteBest {
    double dist = kInf;
    std::int32_t label = -1; // arena index of the closing label
    std::int16_t depot = -1;
};

// Exhaustive lower-level search for one fixed mode assignment: a reachability
// DP over (task set, last task, start depot) with Pareto-pruned (dist, time)
// labels, then an exact split of the pair set over the fleet.
struct ModeSearch {
    const Instance& inst;
    const std::vector<int>& depots;
    std::vector<PairDef> pairs;
    std::vector<TaskSpec> tasks;    // 2 * pairs.size(), a-then-b per pair
    std::vector<int> pair_of_task;  // task -> pair index
    std::vector<bool> is_second;    // task is the b-side of its pair

    explicit ModeSearch(const Instance& i, const std::vector<int>& d) : inst(i), depots(d) {}

    void build_tasks() {
        tasks.clear();
        pair_of_task.clear();
        is_second.clear();
        for (int p = 0; p < static_cast<int>(pairs.size()); ++p) {
            tasks.push_back(pairs[static_cast<std::size_t>(p)].a);
            pair_of_task.push_back(p);
            is_second.push_back(false);
            tasks.push_back(pairs[static_cast<std::size_t>(p)].b);
            pair_of_task.push_back(p);
            is_second.push_back(true);
        }
    }

    // Minimal closed-tour distance for every pair subset a single vehicle can
    // serve. rb is indexed by pair mask; infeasible subsets stay infinite.
    std::vector<RouteBest> route_bests(std::vector<Label>& arena) const {
        const int T = static_cast<int>(tasks.size());
        const int P = static_cast<int>(pairs.size());
        std::vector<RouteBest> rb(static_cast<std::size_t>(1) << P);
        rb[0].dist = 0.0;

        arena.clear();
        // Pareto front per packed (mask, last, depot) state.
        std::unordered_map<std::uint64_t, std::vector<std::int32_t>> front;
        front.reserve(1024);

        auto pack = [T](std::uint32_t mask, int last, int depot) {
            return (static_cast<std::uint64_t>(mask) * static_cast<std::uint64_t>(T + 1) +
                    static_cast<std::uint64_t>(last)) *
                       8ULL +
                   static_cast<std::uint64_t>(depot);
        };

        auto try_add = [&](Label lab) -> bool {
            auto& lst = front[pack(lab.mask, lab.last, lab.depot)];
            for (auto idx : lst) {
                const Label& o = arena[static_cast<std::size_t>(idx)];
                if (o.dist <= lab.dist && o.time <= lab.time) return false;
            }
            std::erase_if(lst, [&](std::int32_t idx) {
                const Label& o = arena[static_cast<std::size_t>(idx)];
                return lab.dist <= o.dist && lab.time <= o.time;
            });
            arena.push_back(lab);
            lst.push_back(static_cast<std::int32_t>(arena.size() - 1));
            return true;
        };

        auto pair_complete = [&](std::uint32_t mask) -> std::uint32_t {
            std::uint32_t pm = 0;
            for (int p = 0; p < P; ++p) {
                const bool ha = mask & (1u << (2 * p));
                const bool hb = mask & (1u << (2 * p + 1));
                if (ha != hb) return UINT32_MAX; // incomplete
                if (ha) pm |= 1u << p;
            }
            return pm;
        };

        auto close_route = [&](std::int32_t idx) {
            const Label& lab = arena[static_cast<std::size_t>(idx)];
            const std::uint32_t pm = pair_complete(lab.mask);
            if (pm == UINT32_MAX) return;
            const int last_node = tasks[static_cast<std::size_t>(lab.last)].node_pos;
            const int depot_pos = depots[static_cast<std::size_t>(lab.depot)];
            if (lab.time + inst.travel_time(last_node, depot_pos) > inst.horizon.latest) return;
            const double total = lab.dist + inst.dist(last_node, depot_pos);
            if (total < rb[pm].dist) rb[pm] = {total, idx, lab.depot};
        };

        // seed labels from every depot
        for (int d = 0; d < static_cast<int>(depots.size()); ++d) {
            for (int t = 0; t < T; ++t) {
                if (is_second[static_cast<std::size_t>(t)]) continue;
                VehState st{depots[static_cast<std::size_t>(d)], inst.horizon.earliest, 0.0};
                if (!advance(inst, inst.fleet.capacity, st, tasks[static_cast<std::size_t>(t)]))
                    continue;
                Label lab;
                lab.mask = 1u << t;
                lab.last = static_cast<std::int16_t>(t);
                lab.depot = static_cast<std::int16_t>(d);
                lab.dist = inst.dist(depots[static_cast<std::size_t>(d)],
                                     tasks[static_cast<std::size_t>(t)].node_pos);
                lab.time = st.time;
                lab.parent = -1;
                try_add(lab);
            }
        }

        // FIFO expansion; every extension grows the mask, so no cycles.
        for (std::size_t head = 0; head < arena.size(); ++head) {
            const Label cur = arena[head]; // copy: arena may reallocate
            close_route(static_cast<std::int32_t>(head));
            double load = 0.0;
            for (int t = 0; t < T; ++t)
                if (cur.mask & (1u << t)) load += tasks[static_cast<std::size_t>(t)].load_delta;
            for (int t = 0; t < T; ++t) {
                if (cur.mask & (1u << t)) continue;
                if (is_second[static_cast<std::size_t>(t)] &&
                    !(cur.mask & (1u << (t - 1))))
                    continue; // b-side before its a-side
                VehState st{tasks[static_cast<std::size_t>(cur.last)].node_pos, cur.time, load};
                if (!advance(inst, inst.fleet.capacity, st, tasks[static_cast<std::size_t>(t)]))
                    continue;
                Label nxt;
                nxt.mask = cur.mask | (1u << t);
                nxt.last = static_cast<std::int16_t>(t);
                nxt.depot = cur.depot;
                nxt.dist = cur.dist + inst.dist(tasks[static_cast<std::size_t>(cur.last)].node_pos,
                                                tasks[static_cast<std::size_t>(t)].node_pos);
                nxt.time = st.time;
                nxt.parent = static_cast<std::int32_t>(head);
                try_add(nxt);
            }
        }
        return rb;
    }
};

// Rebuilds the ordered task list of a closed route from its final label.
std::vector<TaskSpec> unwind(const std::vector<Label>& arena, const ModeSearch& ms,
                             std::int32_t label_idx) {
    std::vector<int> task_order;
    for (std::int32_t i = label_idx; i >= 0; i = arena[static_cast<std::size_t>(i)].parent)
        task_order.push_back(arena[static_cast<std::size_t>(i)].last);
    std::reverse(task_order.begin(), task_order.end());
    std::vector<TaskSpec> out;
    out.reserve(task_order.size());
    for (int t : task_order) out.push_back(ms.tasks[static_cast<std::size_t>(t)]);
    return out;
}

struct RoutePlanOut {
    int depot_pos = 0;
    std::vector<TaskSpec> tasks;
};

Solution assemble_solution(const Instance& inst, const std::vector<Mode>& modes,
                           const std::vector<RoutePlanOut>& route_plans) {
    Solution sol;
    sol.sl_assignments.assign(static_cast<std::size_t>(inst.n_requests()), std::nullopt);
    for (int r = 0; r < inst.n_requests(); ++r)
        if (modes[static_cast<std::size_t>(r)].leg >= 0)
            sol.sl_assignments[static_cast<std::size_t>(r)] =
                SlAssignment{modes[static_cast<std::size_t>(r)].leg,
                             modes[static_cast<std::size_t>(r)].departure};

    double total_d = 0.0;
    for (const auto& rp : route_plans) {
        if (rp.tasks.empty()) continue;
        const RouteTiming tm = schedule_route(inst, rp.depot_pos, rp.tasks);
        if (!tm.feasible)
            throw InfeasibleError("internal: winning route failed to reschedule");
        Route route;
        route.depot_node = inst.nodes[static_cast<std::size_t>(rp.depot_pos)].id;
        route.distance = tm.distance;
        Stop first;
        first.node_id = route.depot_node;
        first.arrival = first.start = first.departure = inst.horizon.earliest;
        route.stops.push_back(first);
        double load = 0.0;
        for (std::size_t k = 0; k < rp.tasks.size(); ++k) {
            const auto& t = rp.tasks[k];
            load += t.load_delta;
            Stop s;
            s.node_id = inst.nodes[static_cast<std::size_t>(t.node_pos)].id;
            s.action = t.action;
            s.request_id = inst.requests[static_cast<std::size_t>(t.req_pos)].id;
            s.arrival = tm.arrival[k];
            s.start = tm.start[k];
            s.departure = tm.completion[k];
            s.load_after = load;
            route.stops.push_back(s);
        }
        Stop lastst;
        lastst.node_id = route.depot_node;
        lastst.arrival = lastst.start = lastst.departure = tm.return_arrival;
        route.stops.push_back(lastst);
        sol.routes.push_back(std::move(route));
        total_d += tm.distance;
    }
    sol.total_distance = total_d;
    double f = 0.0;
    for (int r = 0; r < inst.n_requests(); ++r)
        if (modes[static_cast<std::size_t>(r)].leg >= 0)
            f += inst.legs[static_cast<std::size_t>(modes[static_cast<std::size_t>(r)].leg)].tariff *
                 inst.requests[static_cast<std::size_t>(r)].demand;
    sol.total_flow_cost = f;
    sol.feasible = true;
    return sol;
}

} // namespace

Solution enumerate_optimal(const Instance& inst, const Policy& policy) {
    if (inst.n_requests() > 6)
        throw InvalidInstanceError("exhaustive search limited to 6 requests, instance has " +
                                   std::to_string(inst.n_requests()));
    if (inst.fleet.n_vehicles > 2)
        throw InvalidInstanceError("exhaustive search limited to 2 vehicles, instance has " +
                                   std::to_string(inst.fleet.n_vehicles));
    if (!policy.valid()) throw InvalidInstanceError("invalid policy");

    const int R = inst.n_requests();
    Solution empty;
    empty.sl_assignments.assign(static_cast<std::size_t>(R), std::nullopt);
    if (R == 0) return empty;
    if (inst.fleet.n_vehicles < 1) throw InfeasibleError("no vehicles available");

    const std::vector<int> depots = inst.depot_positions();
    if (depots.empty()) throw InfeasibleError("no depot nodes");

    // Per-request mode lists, pruned by provable timing/capacity bounds. The
    // bounds are true lower bounds on any schedule, so pruning stays exact.
    std::vector<std::vector<Mode>> mode_lists(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        const auto& req = inst.requests[static_cast<std::size_t>(r)];
        const int p = inst.pos_of(req.pickup_node);
        const int dl = inst.pos_of(req.delivery_node);
        double min_depot_to_p = kInf;
        for (int d : depots) min_depot_to_p = std::min(min_depot_to_p, inst.travel_time(d, p));
        const double earliest_pickup_start =
            std::max(req.pickup_tw.earliest, inst.horizon.earliest + min_depot_to_p);
        if (earliest_pickup_start <= req.pickup_tw.latest) {
            // direct mode plausible (fine-grained checks happen in the DP)
            if (earliest_pickup_start + req.service_time + inst.travel_time(p, dl) <=
                req.delivery_tw.latest)
                mode_lists[static_cast<std::size_t>(r)].push_back(Mode{});
            for (int li = 0; li < static_cast<int>(inst.legs.size()); ++li) {
                const auto& leg = inst.legs[static_cast<std::size_t>(li)];
                if (req.demand > leg.capacity_per_departure) continue;
                const int si = inst.pos_of(leg.from_station);
                const int sj = inst.pos_of(leg.to_station);
                const double drop_done_lb = earliest_pickup_start + req.service_time +
                                            inst.travel_time(p, si) + req.service_time;
                for (int w = 0; w < static_cast<int>(leg.departures.size()); ++w) {
                    const double dep = leg.departures[static_cast<std::size_t>(w)];
                    if (dep < drop_done_lb) continue;
                    if (dep + leg.travel_time + req.service_time + inst.travel_time(sj, dl) >
                        req.delivery_tw.latest)
                        continue;
                    mode_lists[static_cast<std::size_t>(r)].push_back(Mode{li, w});
                }
            }
        }
        if (mode_lists[static_cast<std::size_t>(r)].empty())
            throw InfeasibleError("request " + std::to_string(req.id) +
                                  " cannot be served in any mode");
    }

    ModeSearch ms(inst, depots);
    std::vector<Label> arena;

    double best_cost = kInf, best_d = kInf, best_f = kInf;
    std::vector<Mode> best_modes;
    std::vector<RoutePlanOut> best_routes;

    std::vector<int> idx(static_cast<std::size_t>(R), 0);
    std::vector<Mode> modes(static_cast<std::size_t>(R));
    bool done = false;
    while (!done) {
        for (int r = 0; r < R; ++r)
            modes[static_cast<std::size_t>(r)] =
                mode_lists[static_cast<std::size_t>(r)][static_cast<std::size_t>(
                    idx[static_cast<std::size_t>(r)])];

        // per-departure scheduled-line load
        std::map<std::pair<int, int>, double> dep_load;
        bool cap_ok = true;
        double flow = 0.0;
        for (int r = 0; r < R && cap_ok; ++r) {
            const Mode& m = modes[static_cast<std::size_t>(r)];
            if (m.leg < 0) continue;
            const auto& leg = inst.legs[static_cast<std::size_t>(m.leg)];
            const double q = inst.requests[static_cast<std::size_t>(r)].demand;
            double& used = dep_load[{m.leg, m.departure}];
            used += q;
            if (used > leg.capacity_per_departure + 1e-9) cap_ok = false;
            flow += leg.tariff * q;
        }

        // cheap exact bound: flow cost alone already decides some skips
        if (cap_ok && (1.0 - policy.subsidy) * flow <= best_cost) {
            ms.pairs.clear();
            for (int r = 0; r < R; ++r) {
                const auto& req = inst.requests[static_cast<std::size_t>(r)];
                const Mode& m = modes[static_cast<std::size_t>(r)];
                const int p = inst.pos_of(req.pickup_node);
                const int dl = inst.pos_of(req.delivery_node);
                if (m.leg < 0) {
                    PairDef pd;
                    pd.req_pos = r;
                    pd.a = {p,  req.pickup_tw.earliest, req.pickup_tw.latest,
                            req.service_time, req.demand, ActionKind::Pickup, r};
                    pd.b = {dl, req.delivery_tw.earliest, req.delivery_tw.latest,
                            req.service_time, -req.demand, ActionKind::Delivery, r};
                    ms.pairs.push_back(pd);
                } else {
                    const auto& leg = inst.legs[static_cast<std::size_t>(m.leg)];
                    const double dep = leg.departures[static_cast<std::size_t>(m.departure)];
                    const int si = inst.pos_of(leg.from_station);
                    const int sj = inst.pos_of(leg.to_station);
                    PairDef first_mile;
                    first_mile.req_pos = r;
                    first_mile.a = {p,  req.pickup_tw.earliest, req.pickup_tw.latest,
                                    req.service_time, req.demand, ActionKind::Pickup, r};
                    first_mile.b = {si, inst.horizon.earliest, dep - req.service_time,
                                    req.service_time, -req.demand, ActionKind::StationDrop, r};
                    PairDef last_mile;
                    last_mile.req_pos = r;
                    last_mile.a = {sj, dep + leg.travel_time, inst.horizon.latest,
                                   req.service_time, req.demand, ActionKind::StationPick, r};
                    last_mile.b = {dl, req.delivery_tw.earliest, req.delivery_tw.latest,
                                   req.service_time, -req.demand, ActionKind::Delivery, r};
                    ms.pairs.push_back(first_mile);
                    ms.pairs.push_back(last_mile);
                }
            }
            ms.build_tasks();

            const int P = static_cast<int>(ms.pairs.size());
            const std::uint32_t full = (P == 32) ? UINT32_MAX : ((1u << P) - 1u);
            const auto rb = ms.route_bests(arena);

            double cand_d = kInf;
            std::uint32_t cand_split = 0;
            if (inst.fleet.n_vehicles >= 2) {
                // all 2-way splits of the pair set (empty side = idle vehicle)
                for (std::uint32_t s = 0;; s = (s - full) & full) {
                    const double a = rb[s].dist;
                    if (a < kInf) {
                        const double b = rb[full ^ s].dist;
                        if (b < kInf && a + b < cand_d) {
                            cand_d = a + b;
                            cand_split = s;
                        }
                    }
                    if (s == full) break;
                }
            } else {
                cand_d = rb[full].dist;
                cand_split = full;
            }

            if (cand_d < kInf) {
                const double cost = policy_cost(inst.phi, policy, cand_d, flow);
                const bool better = cost < best_cost ||
                                    (cost == best_cost &&
                                     (cand_d < best_d || (cand_d == best_d && flow < best_f)));
                if (better) {
                    best_cost = cost;
                    best_d = cand_d;
                    best_f = flow;
                    best_modes = modes;
                    best_routes.clear();
                    for (std::uint32_t part : {cand_split, full ^ cand_split}) {
                        if (rb[part].label < 0) continue; // empty side
                        RoutePlanOut rp;
                        rp.depot_pos = depots[static_cast<std::size_t>(rb[part].depot)];
                        rp.tasks = unwind(arena, ms, rb[part].label);
                        best_routes.push_back(std::move(rp));
                        if (inst.fleet.n_vehicles < 2) break;
                    }
                }
            }
        }

        // next mode assignment (mixed-radix increment)
        int r = 0;
        while (r < R) {
            if (++idx[static_cast<std::size_t>(r)] <
                static_cast<int>(mode_lists[static_cast<std::size_t>(r)].size()))
                break;
            idx[static_cast<std::size_t>(r)] = 0;
            ++r;
        }
        if (r == R) done = true;
    }

    if (best_modes.empty()) throw InfeasibleError("no feasible assignment of all requests");
    return assemble_solution(inst, best_modes, best_routes);
}

std::vector<Alternative> project_finite(const Instance& inst,
                                        const std::vector<Policy>& policy_grid) {
    if (policy_grid.empty()) throw InvalidInstanceError("empty policy grid");
    std::map<std::pair<double, double>, bool> seen;
    for (const auto& p : policy_grid) {
        const Solution s = enumerate_optimal(inst, p);
        seen[{s.total_distance, s.total_flow_cost}] = true;
    }
    std::vector<Alternative> out;
    out.reserve(seen.size());
    for (const auto& [df, _] : seen) out.push_back({df.first, df.second});
    return out;
}

} // namespace mshift::oracle
