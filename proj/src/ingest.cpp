#include "mshift/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mshift/errors.hpp"
#include "mshift/json_io.hpp"
#include "mshift/rng.hpp"

namespace mshift::ingest {

namespace {

using nlohmann::json;

ParseError fail_at(const std::string& origin, int line, const std::string& why) {
    return ParseError(origin + ":" + std::to_string(line) + ": " + why);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
    return lines;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
}

bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(tok, &pos);
        return pos == tok.size();
    } catch (const std::exception&) {
        return false;
    }
}

double eucl(double ax, double ay, double bx, double by) {
    const double dx = ax - bx, dy = ay - by;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace

LocationPool parse_pool_text(const std::string& text, const std::string& origin) {
    const std::vector<std::string> lines = split_lines(text);
    std::size_t li = 0;
    auto next_line = [&]() -> int {
        while (li < lines.size() && blank(lines[li])) ++li;
        if (li >= lines.size()) return -1;
        return static_cast<int>(li++);
    };

    const int header = next_line();
    if (header < 0) throw fail_at(origin, 1, "empty file, expected `n=<count>`");
    {
        std::string h = lines[static_cast<std::size_t>(header)];
        h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return c == ' ' || c == '\t'; }),
                h.end());
        if (h.rfind("n=", 0) != 0)
            throw fail_at(origin, header + 1, "expected header `n=<count>`, got `" +
                                                  lines[static_cast<std::size_t>(header)] + "`");
        double n_val = 0.0;
        if (!parse_double(h.substr(2), n_val) || n_val < 1.0 ||
            n_val != std::floor(n_val) || n_val > 1e7)
            throw fail_at(origin, header + 1, "bad location count `" + h.substr(2) + "`");
        LocationPool pool;
        const int n = static_cast<int>(n_val);

        for (int i = 0; i < n; ++i) {
            const int ln = next_line();
            if (ln < 0)
                throw fail_at(origin, static_cast<int>(lines.size()),
                              "expected " + std::to_string(n) + " location lines, got " +
                                  std::to_string(i));
            std::istringstream is(lines[static_cast<std::size_t>(ln)]);
            LocationPool::Location loc;
            std::string extra;
            if (!(is >> loc.id >> loc.x >> loc.y) || (is >> extra))
                throw fail_at(origin, ln + 1, "expected `<id> <x> <y>`, got `" +
                                                  lines[static_cast<std::size_t>(ln)] + "`");
            pool.locations.push_back(loc);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (pool.locations[static_cast<std::size_t>(i)].id ==
                    pool.locations[static_cast<std::size_t>(j)].id)
                    throw fail_at(origin, header + 2 + j,
                                  "duplicate location id " +
                                      std::to_string(pool.locations[static_cast<std::size_t>(i)].id));

        // the distance block: n*n whitespace-separated values, any line layout
        pool.dist.assign(static_cast<std::size_t>(n),
                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
        long long got = 0;
        const long long want = static_cast<long long>(n) * n;
        int last_line = header;
        while (got < want) {
            const int ln = next_line();
            if (ln < 0)
                throw fail_at(origin, last_line + 1,
                              "distance block ends early: got " + std::to_string(got) + " of " +
                                  std::to_string(want) + " values");
            last_line = ln;
            std::istringstream is(lines[static_cast<std::size_t>(ln)]);
            std::string tok;
            while (is >> tok) {
                if (got >= want) throw fail_at(origin, ln + 1, "trailing data `" + tok + "`");
                double v = 0.0;
                if (!parse_double(tok, v) || !std::isfinite(v))
                    throw fail_at(origin, ln + 1, "bad distance value `" + tok + "`");
                if (v < 0.0)
                    throw fail_at(origin, ln + 1, "negative distance " + tok);
                const auto r = static_cast<std::size_t>(got / n);
                const auto c = static_cast<std::size_t>(got % n);
                if (r == c && v != 0.0)
                    throw fail_at(origin, ln + 1, "nonzero diagonal entry " + tok);
                pool.dist[r][c] = v;
                ++got;
            }
        }
        while (li < lines.size()) {
            if (!blank(lines[li]))
                throw fail_at(origin, static_cast<int>(li) + 1,
                              "trailing data `" + lines[li] + "`");
            ++li;
        }
        return pool;
    }
}

LocationPool parse_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        // a core JSON instance doubles as a pool: nodes + its distance matrix
        const Instance inst = load_instance(path);
        LocationPool pool;
        for (const auto& nd : inst.nodes) pool.locations.push_back({nd.id, nd.x, nd.y});
        const int n = inst.n_nodes();
        pool.dist.assign(static_cast<std::size_t>(n),
                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                pool.dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    inst.dist(i, j);
        return pool;
    }
    return parse_pool_text(text, path);
}

std::string pool_to_text(const LocationPool& pool) {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << pool.size() << "\n";
    for (const auto& loc : pool.locations) os << loc.id << ' ' << loc.x << ' ' << loc.y << "\n";
    for (const auto& row : pool.dist) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ' ';
            os << row[j];
        }
        os << "\n";
    }
    return os.str();
}

// ---- scheduled-line config ------------------------------------------------------

namespace {

double num_field(const json& obj, const std::string& key, const std::string& where,
                 std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ParseError(where + ": missing `" + key + "`");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
    return v.get<double>();
}

} // namespace

SbahnConfig sbahn_config_from_json(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ParseError(origin + ": expected a JSON object");

    SbahnConfig cfg;
    if (!root.contains("stations") || !root.at("stations").is_array())
        throw ParseError(origin + ": missing `stations` array");
    int idx = 0;
    for (const json& s : root.at("stations")) {
        const std::string where = origin + ": $.stations[" + std::to_string(idx) + "]";
        if (!s.is_object()) throw ParseError(where + ": expected an object");
        SbahnConfig::Station station;
        if (!s.contains("name") || !s.at("name").is_string())
            throw ParseError(where + ": missing string `name`");
        station.name = s.at("name").get<std::string>();
        station.x = num_field(s, "x", where);
        station.y = num_field(s, "y", where);
        cfg.stations.push_back(std::move(station));
        ++idx;
    }

    if (!root.contains("legs") || !root.at("legs").is_array())
        throw ParseError(origin + ": missing `legs` array");
    idx = 0;
    for (const json& l : root.at("legs")) {
        const std::string where = origin + ": $.legs[" + std::to_string(idx) + "]";
        if (!l.is_object()) throw ParseError(where + ": expected an object");
        SbahnConfig::LegDef leg;
        leg.from = static_cast<int>(num_field(l, "from", where));
        leg.to = static_cast<int>(num_field(l, "to", where));
        if (l.contains("travel_time")) {
            const double tt = num_field(l, "travel_time", where);
            if (!(tt > 0.0)) throw ParseError(where + ".travel_time: must be positive");
            leg.travel_time = tt;
        }
        const int n_st = static_cast<int>(cfg.stations.size());
        if (leg.from < 0 || leg.from >= n_st || leg.to < 0 || leg.to >= n_st)
            throw ParseError(where + ": station index out of range");
        if (leg.from == leg.to) throw ParseError(where + ": leg from a station to itself");
        cfg.legs.push_back(leg);
        ++idx;
    }

    cfg.headway_minutes = num_field(root, "headway_minutes", origin, cfg.headway_minutes);
    cfg.capacity_per_departure =
        num_field(root, "capacity_per_departure", origin, cfg.capacity_per_departure);
    cfg.tariff = num_field(root, "tariff", origin, cfg.tariff);
    if (!(cfg.headway_minutes > 0.0)) throw ParseError(origin + ": headway must be positive");
    if (!(cfg.capacity_per_departure > 0.0))
        throw ParseError(origin + ": capacity_per_departure must be positive");
    if (cfg.tariff < 0.0) throw ParseError(origin + ": tariff must be nonnegative");

    if (root.contains("depots")) {
        if (!root.at("depots").is_array())
            throw ParseError(origin + ": `depots` must be an array");
        idx = 0;
        for (const json& d : root.at("depots")) {
            const std::string where = origin + ": $.depots[" + std::to_string(idx) + "]";
            if (!d.is_object()) throw ParseError(where + ": expected an object");
            cfg.depots.emplace_back(num_field(d, "x", where), num_field(d, "y", where));
            ++idx;
        }
    }
    return cfg;
}

SbahnConfig load_sbahn_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sbahn_config_from_json(buf.str(), path);
}

std::vector<ScheduledLeg> build_sbahn(const SbahnConfig& cfg, const TimeWindow& horizon) {
    if (cfg.stations.size() != 5)
        throw InvalidInstanceError("expected 5 stations, config has " +
                                   std::to_string(cfg.stations.size()));
    if (cfg.legs.size() != 14)
        throw InvalidInstanceError("expected 14 directed legs, config has " +
                                   std::to_string(cfg.legs.size()));
    for (std::size_t i = 0; i < cfg.legs.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.legs.size(); ++j)
            if (cfg.legs[i].from == cfg.legs[j].from && cfg.legs[i].to == cfg.legs[j].to)
                throw InvalidInstanceError("duplicate leg " + std::to_string(cfg.legs[i].from) +
                                           " -> " + std::to_string(cfg.legs[i].to));

    std::vector<double> deps;
    for (int n = 1;; ++n) {
        const double t = horizon.earliest + cfg.headway_minutes * n;
        if (t > horizon.latest + 1e-9) break;
        deps.push_back(t);
    }

    std::vector<ScheduledLeg> legs;
    for (const auto& def : cfg.legs) {
        const auto& a = cfg.stations[static_cast<std::size_t>(def.from)];
        const auto& b = cfg.stations[static_cast<std::size_t>(def.to)];
        ScheduledLeg leg;
        leg.from_station = def.from; // station indexes; sample_case rebinds to node ids
        leg.to_station = def.to;
        leg.travel_time = def.travel_time ? *def.travel_time
                                          : eucl(a.x, a.y, b.x, b.y) / (40.0 / 60.0);
        leg.departures = deps;
        leg.capacity_per_departure = cfg.capacity_per_departure;
        leg.tariff = cfg.tariff;
        legs.push_back(std::move(leg));
    }
    return legs;
}

Instance sample_case(const LocationPool& pool, const SbahnConfig& cfg, const CaseParams& params) {
    if (params.n_requests < 0) throw InvalidInstanceError("n_requests must be >= 0");
    if (params.n_depots < 1) throw InvalidInstanceError("need at least one depot");
    if (params.n_vehicles < 1) throw InvalidInstanceError("need at least one vehicle");
    if (!(params.vehicle_capacity > 0.0) || !(params.vehicle_speed > 0.0) ||
        !(params.phi > 0.0) || !(params.tw_width > 0.0) || !(params.horizon_end > 0.0))
        throw InvalidInstanceError("case parameters out of range");

    const TimeWindow horizon{0.0, params.horizon_end};
    std::vector<ScheduledLeg> legs = build_sbahn(cfg, horizon);
    if (params.tariff_override)
        for (auto& leg : legs) leg.tariff = *params.tariff_override;

    const int pool_depots = cfg.depots.empty() ? params.n_depots - 1 : 0;
    const long long need = 2LL * params.n_requests + pool_depots;
    if (need > pool.size())
        throw InvalidInstanceError("pool exhausted: need " + std::to_string(need) +
                                   " distinct locations, pool holds " +
                                   std::to_string(pool.size()));

    Rng rng(params.seed);
    std::vector<int> picks(static_cast<std::size_t>(pool.size()));
    for (int i = 0; i < pool.size(); ++i) picks[static_cast<std::size_t>(i)] = i;
    rng.shuffle(picks);

    double cx = 0.0, cy = 0.0;
    for (const auto& s : cfg.stations) {
        cx += s.x;
        cy += s.y;
    }
    cx /= static_cast<double>(cfg.stations.size());
    cy /= static_cast<double>(cfg.stations.size());

    Instance inst;
    inst.phi = params.phi;
    inst.horizon = horizon;
    inst.fleet = {params.n_vehicles, params.vehicle_capacity, params.vehicle_speed};

    std::vector<int> pool_of_pos; // pool index per node position, -1 for synthetic nodes
    int next_id = 1;
    auto add_node = [&](double x, double y, NodeKind kind, int pool_idx) {
        inst.nodes.push_back({next_id++, x, y, kind});
        pool_of_pos.push_back(pool_idx);
    };

    // the central depot sits at the station centroid
    add_node(cx, cy, NodeKind::Depot, -1);
    std::size_t cursor = 0;
    if (cfg.depots.empty()) {
        for (int i = 0; i < pool_depots; ++i) {
            const auto& loc = pool.locations[static_cast<std::size_t>(picks[cursor])];
            add_node(loc.x, loc.y, NodeKind::Depot, picks[cursor]);
            ++cursor;
        }
    } else {
        for (const auto& [dx, dy] : cfg.depots) add_node(dx, dy, NodeKind::Depot, -1);
    }
    const int station_base = static_cast<int>(inst.nodes.size());
    for (const auto& s : cfg.stations) add_node(s.x, s.y, NodeKind::Station, -1);

    for (auto& leg : legs) {
        // rebind from station index to node id
        leg.from_station = inst.nodes[static_cast<std::size_t>(station_base + leg.from_station)].id;
        leg.to_station = inst.nodes[static_cast<std::size_t>(station_base + leg.to_station)].id;
    }
    inst.legs = std::move(legs);

    struct Draw {
        int pool_pickup = 0, pool_delivery = 0;
        int pickup_pos = 0, delivery_pos = 0;
    };
    std::vector<Draw> draws;
    for (int r = 0; r < params.n_requests; ++r) {
        Draw d;
        d.pool_pickup = picks[cursor++];
        d.pool_delivery = picks[cursor++];
        d.pickup_pos = static_cast<int>(inst.nodes.size());
        d.delivery_pos = d.pickup_pos + 1;
        const auto& lp = pool.locations[static_cast<std::size_t>(d.pool_pickup)];
        const auto& ld = pool.locations[static_cast<std::size_t>(d.pool_delivery)];
        add_node(lp.x, lp.y, NodeKind::Pickup, d.pool_pickup);
        add_node(ld.x, ld.y, NodeKind::Delivery, d.pool_delivery);
        draws.push_back(d);
    }

    // distances: matrix entries verbatim between pool members, straight line
    // for anything involving the centroid, config depots or stations
    const int n = inst.n_nodes();
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int pi = pool_of_pos[static_cast<std::size_t>(i)];
            const int pj = pool_of_pos[static_cast<std::size_t>(j)];
            if (pi >= 0 && pj >= 0)
                dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    pool.dist[static_cast<std::size_t>(pi)][static_cast<std::size_t>(pj)];
            else
                dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    eucl(inst.nodes[static_cast<std::size_t>(i)].x,
                         inst.nodes[static_cast<std::size_t>(i)].y,
                         inst.nodes[static_cast<std::size_t>(j)].x,
                         inst.nodes[static_cast<std::size_t>(j)].y);
        }

    const double W = params.tw_width;
    const double H = params.horizon_end;
    const double v = params.vehicle_speed;
    auto d_of = [&](int a, int b) {
        return dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };
    std::vector<int> depot_pos;
    for (int i = 0; i < n; ++i)
        if (inst.nodes[static_cast<std::size_t>(i)].kind == NodeKind::Depot) depot_pos.push_back(i);

    for (int r = 0; r < params.n_requests; ++r) {
        const Draw& dr = draws[static_cast<std::size_t>(r)];
        const double demand = static_cast<double>(rng.next_int(5, 10));
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double a_p = rng.next_real(0.0, std::max(0.0, H - W - 60.0));
            double arr_d_min = std::numeric_limits<double>::infinity();
            for (int k : depot_pos) {
                const double arr_p = d_of(k, dr.pickup_pos) / v;
                const double start_p = std::max(arr_p, a_p);
                if (start_p > a_p + W) continue;
                arr_d_min = std::min(arr_d_min, start_p + d_of(dr.pickup_pos, dr.delivery_pos) / v);
            }
            if (arr_d_min > H - W) continue;
            const double a_d = rng.next_real(arr_d_min, std::min(arr_d_min + 45.0, H - W));

            bool feasible = false;
            for (int k : depot_pos) {
                const double arr_p = d_of(k, dr.pickup_pos) / v;
                const double start_p = std::max(arr_p, a_p);
                if (start_p > a_p + W) continue;
                const double arr_d = start_p + d_of(dr.pickup_pos, dr.delivery_pos) / v;
                const double start_d = std::max(arr_d, a_d);
                if (start_d > a_d + W) continue;
                if (start_d + d_of(dr.delivery_pos, k) / v <= H) {
                    feasible = true;
                    break;
                }
            }
            if (!feasible) continue;

            Request req;
            req.id = r + 1;
            req.pickup_node = inst.nodes[static_cast<std::size_t>(dr.pickup_pos)].id;
            req.delivery_node = inst.nodes[static_cast<std::size_t>(dr.delivery_pos)].id;
            req.demand = demand;
            req.pickup_tw = {a_p, a_p + W};
            req.delivery_tw = {a_d, a_d + W};
            req.service_time = 0.0;
            inst.requests.push_back(req);
            placed = true;
        }
        if (!placed)
            throw InvalidInstanceError("request " + std::to_string(r + 1) +
                                       ": no feasible time-window anchor after 1000 attempts");
    }

    inst.dist_matrix = std::move(dist);
    inst.finalize();
    return inst;
}

} // namespace mshift::ingest
