#pragma once

#include <cstdint>
#include <cstdlib>

namespace rmfs {

struct Coord {
    int x = 0;
    int y = 0;

    bool operator==(const Coord&) const = default;
};

// Unloaded robots drive under stored shelves, so their travel time is plain
// Manhattan distance at one cell per second.
inline int unloaded_travel_time(Coord a, Coord b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

}  // namespace rmfs
