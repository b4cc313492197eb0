#include "mshift/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mshift/errors.hpp"

namespace mshift {

using nlohmann::json;

namespace {

// All lookups carry a JSON-pointer-ish path so parse failures point at the
// exact offending element.

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ParseError(path + ": " + why);
}

const json& member(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
    return *it;
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

TimeWindow window(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [earliest, latest]");
    return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

json window_json(const TimeWindow& w) { return json::array({w.earliest, w.latest}); }

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Depot: return "depot";
        case NodeKind::Pickup: return "pickup";
        case NodeKind::Delivery: return "delivery";
        case NodeKind::Station: return "station";
    }
    return "pickup";
}

NodeKind kind_from(const std::string& s, const std::string& path) {
    if (s == "depot") return NodeKind::Depot;
    if (s == "pickup") return NodeKind::Pickup;
    if (s == "delivery") return NodeKind::Delivery;
    if (s == "station") return NodeKind::Station;
    fail(path, "unknown node kind '" + s + "'");
}

json parse_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports line/column in e.what()
        throw ParseError(what + ": " + e.what());
    }
}

const char* action_name(ActionKind a) {
    switch (a) {
        case ActionKind::None: return "none";
        case ActionKind::Pickup: return "pickup";
        case ActionKind::Delivery: return "delivery";
        case ActionKind::StationDrop: return "station_drop";
        case ActionKind::StationPick: return "station_pick";
    }
    return "none";
}

ActionKind action_from(const std::string& s, const std::string& path) {
    if (s == "none") return ActionKind::None;
    if (s == "pickup") return ActionKind::Pickup;
    if (s == "delivery") return ActionKind::Delivery;
    if (s == "station_drop") return ActionKind::StationDrop;
    if (s == "station_pick") return ActionKind::StationPick;
    fail(path, "unknown action '" + s + "'");
}

} // namespace

std::string instance_to_json(const Instance& inst) {
    json j;
    j["phi"] = inst.phi;
    j["horizon"] = window_json(inst.horizon);
    j["fleet"] = {{"n_vehicles", inst.fleet.n_vehicles},
                  {"capacity", inst.fleet.capacity},
                  {"speed", inst.fleet.speed}};
    j["nodes"] = json::array();
    for (const auto& n : inst.nodes)
        j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"kind", kind_name(n.kind)}});
    j["requests"] = json::array();
    for (const auto& r : inst.requests)
        j["requests"].push_back({{"id", r.id},
                                 {"pickup", r.pickup_node},
                                 {"delivery", r.delivery_node},
                                 {"demand", r.demand},
                                 {"tw_pickup", window_json(r.pickup_tw)},
                                 {"tw_delivery", window_json(r.delivery_tw)},
                                 {"service_time", r.service_time}});
    j["legs"] = json::array();
    for (const auto& l : inst.legs)
        j["legs"].push_back({{"from_station", l.from_station},
                             {"to_station", l.to_station},
                             {"travel_time", l.travel_time},
                             {"departures", l.departures},
                             {"capacity_per_departure", l.capacity_per_departure},
                             {"tariff", l.tariff}});
    if (inst.dist_matrix) j["dist_matrix"] = *inst.dist_matrix;
    return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
    const json j = parse_text(text, "instance");
    Instance inst;
    inst.phi = num(member(j, "phi", "$"), "$.phi");
    inst.horizon = window(member(j, "horizon", "$"), "$.horizon");

    const json& fleet = member(j, "fleet", "$");
    inst.fleet.n_vehicles = integer(member(fleet, "n_vehicles", "$.fleet"), "$.fleet.n_vehicles");
    inst.fleet.capacity = num(member(fleet, "capacity", "$.fleet"), "$.fleet.capacity");
    inst.fleet.speed = num(member(fleet, "speed", "$.fleet"), "$.fleet.speed");

    const json& nodes = member(j, "nodes", "$");
    if (!nodes.is_array()) fail("$.nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = "$.nodes[" + std::to_string(i) + "]";
        const json& n = nodes[i];
        Node node;
        node.id = integer(member(n, "id", p), p + ".id");
        node.x = num(member(n, "x", p), p + ".x");
        node.y = num(member(n, "y", p), p + ".y");
        const json& k = member(n, "kind", p);
        if (!k.is_string()) fail(p + ".kind", "expected a string");
        node.kind = kind_from(k.get<std::string>(), p + ".kind");
        inst.nodes.push_back(node);
    }

    const json& reqs = member(j, "requests", "$");
    if (!reqs.is_array()) fail("$.requests", "expected an array");
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const std::string p = "$.requests[" + std::to_string(i) + "]";
        const json& r = reqs[i];
        Request req;
        req.id = integer(member(r, "id", p), p + ".id");
        req.pickup_node = integer(member(r, "pickup", p), p + ".pickup");
        req.delivery_node = integer(member(r, "delivery", p), p + ".delivery");
        req.demand = num(member(r, "demand", p), p + ".demand");
        req.pickup_tw = window(member(r, "tw_pickup", p), p + ".tw_pickup");
        req.delivery_tw = window(member(r, "tw_delivery", p), p + ".tw_delivery");
        if (r.contains("service_time")) req.service_time = num(r["service_time"], p + ".service_time");
        inst.requests.push_back(req);
    }

    const json& legs = member(j, "legs", "$");
    if (!legs.is_array()) fail("$.legs", "expected an array");
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const std::string p = "$.legs[" + std::to_string(i) + "]";
        const json& l = legs[i];
        ScheduledLeg leg;
        leg.from_station = integer(member(l, "from_station", p), p + ".from_station");
        leg.to_station = integer(member(l, "to_station", p), p + ".to_station");
        leg.travel_time = num(member(l, "travel_time", p), p + ".travel_time");
        const json& deps = member(l, "departures", p);
        if (!deps.is_array()) fail(p + ".departures", "expected an array");
        for (std::size_t k = 0; k < deps.size(); ++k)
            leg.departures.push_back(num(deps[k], p + ".departures[" + std::to_string(k) + "]"));
        leg.capacity_per_departure =
            num(member(l, "capacity_per_departure", p), p + ".capacity_per_departure");
        leg.tariff = num(member(l, "tariff", p), p + ".tariff");
        inst.legs.push_back(leg);
    }

    if (j.contains("dist_matrix")) {
        const json& m = j["dist_matrix"];
        if (!m.is_array()) fail("$.dist_matrix", "expected an array of rows");
        std::vector<std::vector<double>> matrix;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string p = "$.dist_matrix[" + std::to_string(i) + "]";
            if (!m[i].is_array()) fail(p, "expected a row array");
            std::vector<double> row;
            for (std::size_t k = 0; k < m[i].size(); ++k)
                row.push_back(num(m[i][k], p + "[" + std::to_string(k) + "]"));
            matrix.push_back(std::move(row));
        }
        inst.dist_matrix = std::move(matrix);
    }

    inst.finalize();
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return instance_from_json(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << instance_to_json(inst);
}

std::string solution_to_json(const Solution& sol) {
    json j;
    j["total_distance"] = sol.total_distance;
    j["total_flow_cost"] = sol.total_flow_cost;
    j["feasible"] = sol.feasible;
    j["routes"] = json::array();
    for (const auto& r : sol.routes) {
        json stops = json::array();
        for (const auto& s : r.stops)
            stops.push_back({{"node", s.node_id},
                             {"action", action_name(s.action)},
                             {"request", s.request_id},
                             {"arrival", s.arrival},
                             {"start", s.start},
                             {"departure", s.departure},
                             {"load_after", s.load_after}});
        j["routes"].push_back(
            {{"depot_node", r.depot_node}, {"distance", r.distance}, {"stops", std::move(stops)}});
    }
    j["sl_assignments"] = json::array();
    for (const auto& a : sol.sl_assignments) {
        if (a)
            j["sl_assignments"].push_back({{"leg", a->leg_index}, {"departure", a->departure_index}});
        else
            j["sl_assignments"].push_back(nullptr);
    }
    return j.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text) {
    const json j = parse_text(text, "solution");
    Solution sol;
    sol.total_distance = num(member(j, "total_distance", "$"), "$.total_distance");
    sol.total_flow_cost = num(member(j, "total_flow_cost", "$"), "$.total_flow_cost");
    const json& feas = member(j, "feasible", "$");
    if (!feas.is_boolean()) fail("$.feasible", "expected a boolean");
    sol.feasible = feas.get<bool>();

    const json& routes = member(j, "routes", "$");
    if (!routes.is_array()) fail("$.routes", "expected an array");
    for (std::size_t i = 0; i < routes.size(); ++i) {
        const std::string p = "$.routes[" + std::to_string(i) + "]";
        const json& r = routes[i];
        Route route;
        route.depot_node = integer(member(r, "depot_node", p), p + ".depot_node");
        route.distance = num(member(r, "distance", p), p + ".distance");
        const json& stops = member(r, "stops", p);
        if (!stops.is_array()) fail(p + ".stops", "expected an array");
        for (std::size_t k = 0; k < stops.size(); ++k) {
            const std::string ps = p + ".stops[" + std::to_string(k) + "]";
            const json& s = stops[k];
            Stop stop;
            stop.node_id = integer(member(s, "node", ps), ps + ".node");
            const json& act = member(s, "action", ps);
            if (!act.is_string()) fail(ps + ".action", "expected a string");
            stop.action = action_from(act.get<std::string>(), ps + ".action");
            stop.request_id = integer(member(s, "request", ps), ps + ".request");
            stop.arrival = num(member(s, "arrival", ps), ps + ".arrival");
            stop.start = num(member(s, "start", ps), ps + ".start");
            stop.departure = num(member(s, "departure", ps), ps + ".departure");
            stop.load_after = num(member(s, "load_after", ps), ps + ".load_after");
            route.stops.push_back(stop);
        }
        sol.routes.push_back(std::move(route));
    }

    const json& asg = member(j, "sl_assignments", "$");
    if (!asg.is_array()) fail("$.sl_assignments", "expected an array");
    for (std::size_t i = 0; i < asg.size(); ++i) {
        const std::string p = "$.sl_assignments[" + std::to_string(i) + "]";
        if (asg[i].is_null()) {
            sol.sl_assignments.push_back(std::nullopt);
        } else {
            SlAssignment a;
            a.leg_index = integer(member(asg[i], "leg", p), p + ".leg");
            a.departure_index = integer(member(asg[i], "departure", p), p + ".departure");
            sol.sl_assignments.push_back(a);
        }
    }
    return sol;
}

} // namespace mshift
