#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mshift/errors.hpp"

namespace mshift {

enum class NodeKind { Depot, Pickup, Delivery, Station };

struct Node {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    NodeKind kind = NodeKind::Pickup;
};

struct TimeWindow {
    double earliest = 0.0;
    double latest = 0.0;

    double width() const { return latest - earliest; }
    bool contains(double t) const { return t >= earliest && t <= latest; }
};

struct Request {
    int id = 0;
    int pickup_node = 0;
    int delivery_node = 0;
    double demand = 0.0;
    TimeWindow pickup_tw;
    TimeWindow delivery_tw;
    double service_time = 0.0;
};

// One directed scheduled connection between two station nodes. Departures are
// absolute times; every departure carries the same residual freight capacity.
struct ScheduledLeg {
    int from_station = 0;
    int to_station = 0;
    double travel_time = 0.0;
    std::vector<double> departures;
    double capacity_per_departure = 0.0;
    double tariff = 0.0; // flat charge per demand unit routed over this leg
};

struct Fleet {
    int n_vehicles = 0;
    double capacity = 0.0;
    double speed = 1.0;
};

class Instance {
public:
    std::vector<Node> nodes;
    std::vector<Request> requests;
    std::vector<ScheduledLeg> legs;
    Fleet fleet;
    double phi = 1.0; // road cost per unit distance
    TimeWindow horizon;
    // Optional explicit distances indexed by node position (row-major, n x n).
    // Absent means Euclidean distances from coordinates.
    std::optional<std::vector<std::vector<double>>> dist_matrix;

    // Call once after filling the fields; builds the id lookup.
    void finalize();

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_requests() const { return static_cast<int>(requests.size()); }

    // Position of a node id in `nodes`. Throws on unknown ids.
    int pos_of(int node_id) const;

    const Node& node_by_id(int node_id) const { return nodes[static_cast<std::size_t>(pos_of(node_id))]; }

    // Distance between node positions (not ids).
    double dist(int a_pos, int b_pos) const {
        if (dist_matrix)
            return (*dist_matrix)[static_cast<std::size_t>(a_pos)][static_cast<std::size_t>(b_pos)];
        const Node& a = nodes[static_cast<std::size_t>(a_pos)];
        const Node& b = nodes[static_cast<std::size_t>(b_pos)];
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return std::sqrt(dx * dx + dy * dy);
    }

    double dist_by_id(int a_id, int b_id) const { return dist(pos_of(a_id), pos_of(b_id)); }

    double travel_time(int a_pos, int b_pos) const { return dist(a_pos, b_pos) / fleet.speed; }

    std::vector<int> depot_positions() const {
        std::vector<int> out;
        for (int i = 0; i < n_nodes(); ++i)
            if (nodes[static_cast<std::size_t>(i)].kind == NodeKind::Depot) out.push_back(i);
        return out;
    }

private:
    std::vector<std::pair<int, int>> id_index_; // (id, position), sorted by id
};

struct Policy {
    double subsidy = 0.0; // s in [0, 1], share of the scheduled-line tariff covered
    double tax = 0.0;     // t >= 0, per-unit surcharge multiplier on road cost

    bool valid() const { return subsidy >= 0.0 && subsidy <= 1.0 && tax >= 0.0; }
};

// Structural instance check; returns human-readable problems, empty when clean.
std::vector<std::string> validate_instance(const Instance& inst);

} // namespace mshift
