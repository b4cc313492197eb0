#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mshift/types.hpp"

namespace mshift::ingest {

// A city's candidate order locations with pairwise road distances (km).
struct LocationPool {
    struct Location {
        int id = 0;
        double x = 0.0, y = 0.0;
    };
    std::vector<Location> locations;
    std::vector<std::vector<double>> dist; // [i][j] by pool position

    int size() const { return static_cast<int>(locations.size()); }
};

// Pool text format: `n=<count>`, then <count> lines `<id> <x> <y>`, then an
// n x n whitespace-separated distance block. A JSON instance file is accepted
// too (its nodes and distance matrix become the pool).
LocationPool parse_pool(const std::string& path);
LocationPool parse_pool_text(const std::string& text, const std::string& origin = "<string>");
std::string pool_to_text(const LocationPool& pool);

// Light-rail network description, user-editable JSON:
//   { "stations": [ {"name", "x", "y"}, ... 5 entries ],
//     "legs": [ {"from", "to", "travel_time"?}, ... 14 entries ],
//     "headway_minutes": 10, "capacity_per_departure": 60, "tariff": 2.4,
//     "depots": [ {"x", "y"}, ... ] }
// Leg travel time defaults to station distance at 40 km/h.
struct SbahnConfig {
    struct Station {
        std::string name;
        double x = 0.0, y = 0.0;
    };
    struct LegDef {
        int from = 0, to = 0; // station indexes
        std::optional<double> travel_time;
    };
    std::vector<Station> stations;
    std::vector<LegDef> legs;
    double headway_minutes = 10.0;
    double capacity_per_departure = 60.0;
    double tariff = 2.4;
    std::vector<std::pair<double, double>> depots;
};

SbahnConfig load_sbahn_config(const std::string& path);
SbahnConfig sbahn_config_from_json(const std::string& text, const std::string& origin = "<string>");

// Scheduled legs over the given horizon. from/to hold station indexes
// (0-based, in config order); sample_case rebinds them to node ids. Enforces
// the expected network shape: 5 stations, 14 directed legs.
std::vector<ScheduledLeg> build_sbahn(const SbahnConfig& cfg, const TimeWindow& horizon);

struct CaseParams {
    std::uint64_t seed = 1;
    int n_requests = 100;
    int n_depots = 4;
    int n_vehicles = 40;
    double vehicle_capacity = 25.0;
    double vehicle_speed = 1.0; // km per minute (60 km/h)
    double phi = 1.24;          // money per km
    double tw_width = 60.0;     // minutes
    double horizon_end = 600.0; // minutes
    std::optional<double> tariff_override;
};

// Samples order endpoints from the pool and assembles a full case instance.
// Sampled node pairs keep their exact matrix distances; rows involving
// stations and depots (which are not pool members) fall back to straight-line
// distance. One depot beyond those listed in the config is placed at the
// station centroid.
Instance sample_case(const LocationPool& pool, const SbahnConfig& cfg, const CaseParams& params);

} // namespace mshift::ingest
