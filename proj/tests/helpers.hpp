#pragma once

// Hand-built fixtures shared across the test binaries. The geometry is kept on
// a line so every distance in the assertions can be checked by head.

#include <vector>

#include "mshift/oracle.hpp"
#include "mshift/types.hpp"

namespace testutil {

// The worked two-alternative lower level: (distance, flow cost) pairs.
inline std::vector<mshift::oracle::Alternative> two_alternatives() {
    return {{15.0, 20.0}, {20.0, 5.0}};
}

// One request, two competing scheduled legs. Unit speed, phi = 1, demand 5.
// Hand accounting with the two depots at the pickup / delivery points:
//   leg A (tariff 4/unit): feeder tours 8 + 7   -> distance 15, flow 20
//   leg B (tariff 1/unit): feeder tours 10 + 10 -> distance 20, flow  5
//   pure road: 207, dominated under every valid policy
// so the instance projects onto exactly the two_alternatives() pairs.
inline mshift::Instance two_leg_choice() {
    using namespace mshift;
    Instance inst;
    inst.nodes = {
        {1, 0.0, 0.0, NodeKind::Depot},     {2, 103.5, 0.0, NodeKind::Depot},
        {3, 4.0, 0.0, NodeKind::Station},   {4, 100.0, 0.0, NodeKind::Station},
        {5, -5.0, 0.0, NodeKind::Station},  {6, 108.5, 0.0, NodeKind::Station},
        {7, 0.0, 0.0, NodeKind::Pickup},    {8, 103.5, 0.0, NodeKind::Delivery},
    };
    inst.requests = {{1, 7, 8, 5.0, {0.0, 480.0}, {0.0, 480.0}, 0.0}};
    ScheduledLeg a;
    a.from_station = 3;
    a.to_station = 4;
    a.travel_time = 50.0;
    a.departures = {12.0, 100.0, 200.0, 300.0};
    a.capacity_per_departure = 60.0;
    a.tariff = 4.0;
    ScheduledLeg b = a;
    b.from_station = 5;
    b.to_station = 6;
    b.travel_time = 60.0;
    b.tariff = 1.0;
    inst.legs = {a, b};
    inst.fleet = {2, 25.0, 1.0};
    inst.phi = 1.0;
    inst.horizon = {0.0, 480.0};
    inst.finalize();
    return inst;
}

// One request, one scheduled leg, phi = 1, demand 5. Pure road costs 28; the
// line path drives 20 - 2*dest_shift and pays 5*tariff_per_unit in flow, so
// with the defaults the base policy stays on the road while full subsidy (or
// any sufficiently taxed policy) moves the request onto the line.
inline mshift::Instance line_shift_tiny(double tariff_per_unit = 2.0, double dest_shift = 0.0) {
    using namespace mshift;
    Instance inst;
    inst.nodes = {
        {1, -2.0, 0.0, NodeKind::Depot},            {2, 14.0, 0.0, NodeKind::Depot},
        {3, 3.0, 0.0, NodeKind::Station},           {4, 9.0 + dest_shift, 0.0, NodeKind::Station},
        {5, 0.0, 0.0, NodeKind::Pickup},            {6, 12.0, 0.0, NodeKind::Delivery},
    };
    inst.requests = {{1, 5, 6, 5.0, {0.0, 480.0}, {0.0, 480.0}, 0.0}};
    ScheduledLeg leg;
    leg.from_station = 3;
    leg.to_station = 4;
    leg.travel_time = 20.0;
    leg.departures = {10.0, 70.0, 130.0, 190.0, 250.0, 310.0};
    leg.capacity_per_departure = 60.0;
    leg.tariff = tariff_per_unit;
    inst.legs = {leg};
    inst.fleet = {2, 25.0, 1.0};
    inst.phi = 1.0;
    inst.horizon = {0.0, 480.0};
    inst.finalize();
    return inst;
}

// Three requests around one leg, loose windows; roomy enough that every mode
// is feasible and small enough for the exhaustive solver.
inline mshift::Instance three_request_mix() {
    using namespace mshift;
    Instance inst;
    inst.nodes = {
        {1, 0.0, 0.0, NodeKind::Depot},    {2, 30.0, 0.0, NodeKind::Depot},
        {3, 5.0, 0.0, NodeKind::Station},  {4, 25.0, 0.0, NodeKind::Station},
        {5, 2.0, 3.0, NodeKind::Pickup},   {6, 28.0, -2.0, NodeKind::Delivery},
        {7, 1.0, -4.0, NodeKind::Pickup},  {8, 27.0, 3.0, NodeKind::Delivery},
        {9, 12.0, 1.0, NodeKind::Pickup},  {10, 18.0, -1.0, NodeKind::Delivery},
    };
    inst.requests = {
        {1, 5, 6, 8.0, {0.0, 400.0}, {0.0, 400.0}, 0.0},
        {2, 7, 8, 6.0, {0.0, 400.0}, {0.0, 400.0}, 0.0},
        {3, 9, 10, 4.0, {0.0, 400.0}, {0.0, 400.0}, 0.0},
    };
    ScheduledLeg leg;
    leg.from_station = 3;
    leg.to_station = 4;
    leg.travel_time = 15.0;
    leg.departures = {20.0, 60.0, 100.0, 140.0, 180.0};
    leg.capacity_per_departure = 10.0; // tight: both big requests cannot share one departure
    leg.tariff = 0.5;
    inst.legs = {leg};
    inst.fleet = {2, 25.0, 1.0};
    inst.phi = 1.0;
    inst.horizon = {0.0, 400.0};
    inst.finalize();
    return inst;
}

} // namespace testutil
