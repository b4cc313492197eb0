#include "mshift/solution.hpp"

#include <algorithm>

namespace mshift {

int vehicles_used(const Solution& sol) {
    int n = 0;
    for (const auto& r : sol.routes)
        if (!r.stops.empty()) {
            bool moving = false;
            for (const auto& s : r.stops)
                if (s.action != ActionKind::None) {
                    moving = true;
                    break;
                }
            if (moving) ++n;
        }
    return n;
}

double max_load(const Solution& sol) {
    double m = 0.0;
    for (const auto& r : sol.routes)
        for (const auto& s : r.stops) m = std::max(m, s.load_after);
    return m;
}

double modal_shift(const Solution& sol) {
    if (sol.sl_assignments.empty()) return 0.0;
    int n = 0;
    for (const auto& a : sol.sl_assignments)
        if (a.has_value()) ++n;
    return static_cast<double>(n) / static_cast<double>(sol.sl_assignments.size());
}

double modal_shift_by_demand(const Instance& inst, const Solution& sol) {
    double total = 0.0, shifted = 0.0;
    for (std::size_t i = 0; i < sol.sl_assignments.size() && i < inst.requests.size(); ++i) {
        total += inst.requests[i].demand;
        if (sol.sl_assignments[i].has_value()) shifted += inst.requests[i].demand;
    }
    return total > 0.0 ? shifted / total : 0.0;
}

} // namespace mshift
