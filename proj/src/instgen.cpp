#include "mshift/instgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mshift/errors.hpp"
#include "mshift/rng.hpp"

namespace mshift::instgen {

namespace {

constexpr double kSampleRadius = 5.0; // half the Metropolitan station spacing
constexpr double kTrainCapacity = 60.0;
constexpr double kPhi = 0.25;
constexpr double kTariffPerDistance = 0.1;
constexpr double kPi = 3.14159265358979323846;

double station_spacing(Geography g) { return g == Geography::Intercity ? 20.0 : 10.0; }

struct Pt {
    double x = 0.0, y = 0.0;
};

double eucl(const Pt& a, const Pt& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

std::vector<double> departure_times(const TimeWindow& horizon, double headway) {
    std::vector<double> out;
    for (int n = 1;; ++n) {
        const double t = horizon.earliest + headway * n;
        if (t > horizon.latest + 1e-9) break;
        out.push_back(t);
    }
    return out;
}

int nearest_station(const std::vector<Pt>& stations, const Pt& p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(stations.size()); ++i) {
        const double d = eucl(stations[static_cast<std::size_t>(i)], p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Pt sample_around(Rng& rng, const Pt& center) {
    const double angle = rng.next_real(0.0, 2.0 * kPi);
    const double radius = kSampleRadius * std::sqrt(rng.next_real());
    return {center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)};
}

} // namespace

Instance generate(const GenSpec& spec) {
    if (!spec.valid()) throw InvalidInstanceError("generator spec out of range");
    Rng rng(spec.seed);

    const int S = spec.n_stations;
    const double spacing = station_spacing(spec.geography);
    std::vector<Pt> st(static_cast<std::size_t>(S));
    for (int i = 0; i < S; ++i) st[static_cast<std::size_t>(i)] = {spacing * i, 0.0};

    Instance inst;
    inst.phi = kPhi;
    inst.horizon = {0.0, spec.horizon_end};
    // depots take ids 1..S, the co-located stations S+1..2S
    for (int i = 0; i < S; ++i)
        inst.nodes.push_back({i + 1, st[static_cast<std::size_t>(i)].x,
                              st[static_cast<std::size_t>(i)].y, NodeKind::Depot});
    for (int i = 0; i < S; ++i)
        inst.nodes.push_back({S + i + 1, st[static_cast<std::size_t>(i)].x,
                              st[static_cast<std::size_t>(i)].y, NodeKind::Station});

    const std::vector<double> deps =
        departure_times(inst.horizon, 60.0 / spec.frequency_per_hour);
    for (int a = 0; a < S; ++a)
        for (int b = 0; b < S; ++b) {
            if (a == b) continue;
            ScheduledLeg leg;
            leg.from_station = S + a + 1;
            leg.to_station = S + b + 1;
            const double d = eucl(st[static_cast<std::size_t>(a)], st[static_cast<std::size_t>(b)]);
            leg.travel_time = d; // trains run at unit speed, like the fleet default
            leg.departures = deps;
            leg.capacity_per_departure = kTrainCapacity;
            leg.tariff = kTariffPerDistance * d;
            inst.legs.push_back(std::move(leg));
        }

    inst.fleet.n_vehicles =
        spec.n_vehicles > 0 ? spec.n_vehicles : std::max(2, (spec.n_requests + 1) / 2);
    inst.fleet.capacity = spec.vehicle_capacity;
    inst.fleet.speed = spec.vehicle_speed;

    const double W = spec.tw_class == TwClass::Tight ? 45.0 : 60.0;
    const double H = spec.horizon_end;
    const double v = spec.vehicle_speed;
    int next_node_id = 2 * S + 1;

    for (int r = 0; r < spec.n_requests; ++r) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const int sp = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(S)));
            const Pt p = sample_around(rng, st[static_cast<std::size_t>(sp)]);
            Pt dl;
            if (spec.allocation == Allocation::Random) {
                const int sd = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(S)));
                dl = sample_around(rng, st[static_cast<std::size_t>(sd)]);
            } else {
                // endpoints must gravitate to different stations
                const int near_p = nearest_station(st, p);
                bool found = false;
                for (int tries = 0; tries < 1000 && !found; ++tries) {
                    const int sd =
                        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(S)));
                    dl = sample_around(rng, st[static_cast<std::size_t>(sd)]);
                    found = nearest_station(st, dl) != near_p;
                }
                if (!found) continue;
            }

            const double demand = static_cast<double>(rng.next_int(5, 10));
            const double a_p = rng.next_real(0.0, std::max(0.0, H - W - 60.0));

            // earliest delivery arrival over depots that can still make the pickup
            double arr_d_min = std::numeric_limits<double>::infinity();
            for (int k = 0; k < S; ++k) {
                const double arr_p = eucl(st[static_cast<std::size_t>(k)], p) / v;
                const double start_p = std::max(arr_p, a_p);
                if (start_p > a_p + W) continue;
                arr_d_min = std::min(arr_d_min, start_p + eucl(p, dl) / v);
            }
            if (arr_d_min > H - W) continue;
            const double a_d = rng.next_real(arr_d_min, std::min(arr_d_min + 45.0, H - W));

            // direct road service must work end to end from at least one depot
            bool feasible = false;
            for (int k = 0; k < S && !feasible; ++k) {
                const Pt& dep = st[static_cast<std::size_t>(k)];
                const double arr_p = eucl(dep, p) / v;
                const double start_p = std::max(arr_p, a_p);
                if (start_p > a_p + W) continue;
                const double arr_d = start_p + eucl(p, dl) / v;
                const double start_d = std::max(arr_d, a_d);
                if (start_d > a_d + W) continue;
                feasible = start_d + eucl(dl, dep) / v <= H;
            }
            if (!feasible) continue;

            Request req;
            req.id = r + 1;
            req.pickup_node = next_node_id;
            req.delivery_node = next_node_id + 1;
            req.demand = demand;
            req.pickup_tw = {a_p, a_p + W};
            req.delivery_tw = {a_d, a_d + W};
            req.service_time = 0.0;
            inst.nodes.push_back({next_node_id, p.x, p.y, NodeKind::Pickup});
            inst.nodes.push_back({next_node_id + 1, dl.x, dl.y, NodeKind::Delivery});
            inst.requests.push_back(req);
            next_node_id += 2;
            placed = true;
        }
        if (!placed)
            throw InvalidInstanceError("request " + std::to_string(r + 1) +
                                       ": no feasible placement after 1000 attempts");
    }

    inst.finalize();
    if (spec.scatteredness_k != 1.0) return apply_scatteredness(inst, spec.scatteredness_k);
    return inst;
}

Instance apply_scatteredness(const Instance& inst, double k) {
    if (k < 0.0) throw InvalidInstanceError("scatteredness factor must be >= 0");
    if (inst.dist_matrix)
        throw InvalidInstanceError(
            "scatteredness needs coordinate geometry; this instance carries an explicit "
            "distance matrix");
    const double factor = k / 2.0 + 0.5;
    if (factor == 1.0) return inst;

    double cx = 0.0, cy = 0.0;
    int n_st = 0;
    for (const auto& nd : inst.nodes)
        if (nd.kind == NodeKind::Station) {
            cx += nd.x;
            cy += nd.y;
            ++n_st;
        }
    if (n_st == 0)
        throw InvalidInstanceError("instance has no station nodes to anchor the scaling");
    cx /= n_st;
    cy /= n_st;

    Instance out = inst;
    for (auto& nd : out.nodes) {
        nd.x = cx + factor * (nd.x - cx);
        nd.y = cy + factor * (nd.y - cy);
    }
    // legs ride the same geometry: travel time and the distance-proportional
    // tariff scale with the coordinates
    for (auto& leg : out.legs) {
        leg.travel_time *= factor;
        leg.tariff *= factor;
    }
    return out;
}

Instance set_frequency(const Instance& inst, int per_hour) {
    if (per_hour < 1) throw InvalidInstanceError("frequency must be at least 1 per hour");
    Instance out = inst;
    const std::vector<double> deps = departure_times(inst.horizon, 60.0 / per_hour);
    for (auto& leg : out.legs) leg.departures = deps;
    return out;
}

ScenarioSet scenario_set(const GenSpec& spec, int n_scenarios) {
    if (n_scenarios < 1) throw InvalidInstanceError("need at least one scenario");
    ScenarioSet out;
    for (int i = 0; i < n_scenarios; ++i) {
        GenSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(i);
        out.seeds.push_back(s.seed);
        out.instances.push_back(generate(s));
    }
    return out;
}

} // namespace mshift::instgen
