#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "rmfs/sim.hpp"

namespace rmfs::test {

// Exhaustive enumeration over every action sequence of the given depth on a
// frozen state. Returns the minimal accumulated cycle time; `best_first`
// (optional) receives the first action of the best sequence, ties broken by
// trying actions in ascending location order.
inline std::int64_t brute_force_cost(const SimState& at_decision, int depth,
                                     int* best_first = nullptr) {
    if (depth == 0) return 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    const auto free = at_decision.free_locations();
    for (const int action : free) {
        SimState next = at_decision.snapshot();
        std::int64_t cost = next.apply_action(action).cycle_time;
        if (next.advance()) {
            cost += brute_force_cost(next, depth - 1);
        }
        if (cost < best) {
            best = cost;
            if (best_first) *best_first = action;
        }
    }
    return best;
}

}  // namespace rmfs::test
