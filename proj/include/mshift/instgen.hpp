#pragma once

#include <cstdint>
#include <vector>

#include "mshift/types.hpp"

namespace mshift::instgen {

enum class Geography { Intercity, Metropolitan };
enum class Allocation { Different, Random };
enum class TwClass { Tight, Wide };

// Knobs for the synthetic families. Geometry follows the two-geography layout:
// stations in a line, Intercity spacing twice the Metropolitan spacing, order
// endpoints sampled in a disc around stations. Fields below the seed are
// artifact knobs the source experiments leave unstated; defaults are pinned
// here and in the format notes.
struct GenSpec {
    Geography geography = Geography::Intercity;
    Allocation allocation = Allocation::Random;
    TwClass tw_class = TwClass::Wide;
    int n_requests = 25;
    int n_stations = 3;
    std::uint64_t seed = 1;
    int frequency_per_hour = 6;
    double scatteredness_k = 1.0; // coordinate scale factor (k/2 + 0.5)

    int n_vehicles = 0;       // 0 = derive max(2, ceil(n_requests / 2))
    double vehicle_capacity = 25.0;
    double vehicle_speed = 1.0;
    double horizon_end = 480.0;

    bool valid() const {
        return n_requests >= 0 && n_stations >= 1 && frequency_per_hour >= 1 &&
               scatteredness_k >= 0.0 && vehicle_capacity > 0.0 && vehicle_speed > 0.0 &&
               horizon_end > 0.0;
    }
};

struct ScenarioSet {
    std::vector<Instance> instances;
    std::vector<std::uint64_t> seeds;
};

// Deterministic synthetic instance. Requests whose windows cannot be met by
// direct road service are resampled (bounded attempts, then error).
Instance generate(const GenSpec& spec);

// Scales every coordinate about the station centroid by (k/2 + 0.5); station
// spacing scales along, so k=0 turns an Intercity layout into the Metropolitan
// one. Leg travel times and distance-proportional tariffs rescale with the
// geometry. k=1 returns the instance bit-identical.
Instance apply_scatteredness(const Instance& inst, double k);

// Rebuilds every leg's departures evenly spaced at 60/per_hour over the
// horizon, first departure one headway after the horizon start (a departure
// at the start itself could never be loaded).
Instance set_frequency(const Instance& inst, int per_hour);

// n instances differing only in request sampling; scenario i uses seed + i.
ScenarioSet scenario_set(const GenSpec& spec, int n_scenarios);

} // namespace mshift::instgen
