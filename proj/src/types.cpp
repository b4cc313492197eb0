#include "mshift/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mshift {

void Instance::finalize() {
    id_index_.clear();
    id_index_.reserve(nodes.size());
    for (int i = 0; i < n_nodes(); ++i) id_index_.emplace_back(nodes[static_cast<std::size_t>(i)].id, i);
    std::sort(id_index_.begin(), id_index_.end());
}

int Instance::pos_of(int node_id) const {
    auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(node_id, -1));
    if (it == id_index_.end() || it->first != node_id) {
        std::ostringstream os;
        os << "unknown node id " << node_id;
        throw InvalidInstanceError(os.str());
    }
    return it->second;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

} // namespace

std::vector<std::string> validate_instance(const Instance& inst) {
    std::vector<std::string> problems;
    auto add = [&](const std::string& s) { problems.push_back(s); };

    std::set<int> ids;
    for (const auto& n : inst.nodes) {
        if (!ids.insert(n.id).second) add("duplicate node id " + std::to_string(n.id));
        if (!finite(n.x) || !finite(n.y)) add("non-finite coordinates on node " + std::to_string(n.id));
    }
    auto known = [&](int id) { return ids.count(id) > 0; };
    auto kind_of = [&](int id) -> NodeKind {
        for (const auto& n : inst.nodes)
            if (n.id == id) return n.kind;
        return NodeKind::Pickup;
    };

    std::set<int> req_ids;
    for (const auto& r : inst.requests) {
        const std::string tag = "request " + std::to_string(r.id);
        if (!req_ids.insert(r.id).second) add("duplicate " + tag);
        if (r.demand <= 0.0) add(tag + ": demand must be positive");
        if (r.pickup_node == r.delivery_node) add(tag + ": pickup equals delivery");
        if (!known(r.pickup_node)) add(tag + ": unknown pickup node " + std::to_string(r.pickup_node));
        if (!known(r.delivery_node)) add(tag + ": unknown delivery node " + std::to_string(r.delivery_node));
        if (r.pickup_tw.earliest > r.pickup_tw.latest) add(tag + ": pickup window inverted");
        if (r.delivery_tw.earliest > r.delivery_tw.latest) add(tag + ": delivery window inverted");
        if (r.service_time < 0.0) add(tag + ": negative service time");
    }

    for (std::size_t li = 0; li < inst.legs.size(); ++li) {
        const auto& leg = inst.legs[li];
        const std::string tag = "leg " + std::to_string(li);
        if (!known(leg.from_station)) add(tag + ": unknown origin node " + std::to_string(leg.from_station));
        else if (kind_of(leg.from_station) != NodeKind::Station) add(tag + ": origin is not a station");
        if (!known(leg.to_station)) add(tag + ": unknown destination node " + std::to_string(leg.to_station));
        else if (kind_of(leg.to_station) != NodeKind::Station) add(tag + ": destination is not a station");
        if (leg.from_station == leg.to_station) add(tag + ": origin equals destination");
        if (leg.travel_time < 0.0) add(tag + ": negative travel time");
        if (leg.capacity_per_departure < 0.0) add(tag + ": negative capacity");
        if (leg.tariff < 0.0) add(tag + ": negative tariff");
        for (std::size_t k = 1; k < leg.departures.size(); ++k)
            if (!(leg.departures[k] > leg.departures[k - 1])) {
                add(tag + ": departures not strictly increasing");
                break;
            }
    }

    if (inst.fleet.n_vehicles < 0) add("negative vehicle count");
    if (inst.fleet.capacity <= 0.0) add("vehicle capacity must be positive");
    if (inst.fleet.speed <= 0.0) add("vehicle speed must be positive");
    if (inst.phi <= 0.0) add("phi must be positive");
    if (inst.horizon.earliest > inst.horizon.latest) add("horizon inverted");

    if (inst.dist_matrix) {
        const auto& m = *inst.dist_matrix;
        const std::size_t n = inst.nodes.size();
        if (m.size() != n) add("distance matrix row count != node count");
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].size() != n) {
                add("distance matrix row " + std::to_string(i) + " has wrong width");
                continue;
            }
            for (std::size_t j = 0; j < m[i].size(); ++j) {
                if (!finite(m[i][j]) || m[i][j] < 0.0) {
                    add("distance matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") negative or non-finite");
                }
            }
            if (i < m.size() && m[i].size() == n && m[i][i] != 0.0)
                add("distance matrix diagonal (" + std::to_string(i) + ") nonzero");
        }
    }

    return problems;
}

} // namespace mshift
