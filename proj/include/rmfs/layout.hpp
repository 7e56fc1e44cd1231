#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rmfs/grid.hpp"

namespace rmfs {

struct LayoutConfig {
    int columns = 6;
    int rows = 6;
    // Defaults to (columns, 0): bottom aisle row, roughly centered.
    std::optional<Coord> station{};
};

// Storage grid geometry. Storage columns are one cell wide and sit at odd x;
// every even-x column plus the rows y=0 and y=rows+1 are aisles. Loaded
// robots are confined to the aisle graph and may enter a storage cell only
// from a 4-adjacent aisle cell; unloaded robots cut straight under shelves.
class Layout {
public:
    static Layout build(const LayoutConfig& cfg);

    int columns() const { return columns_; }
    int rows() const { return rows_; }
    int location_count() const { return columns_ * rows_; }
    Coord station() const { return station_; }

    Coord cell(int location) const { return cells_[static_cast<std::size_t>(location)]; }
    const std::vector<Coord>& cells() const { return cells_; }

    // Location id at a coordinate, if it is a storage cell.
    std::optional<int> location_at(Coord c) const;

    int grid_width() const { return 2 * columns_ + 1; }   // x in [0, 2*columns]
    int grid_height() const { return rows_ + 2; }          // y in [0, rows+1]
    bool in_grid(Coord c) const {
        return c.x >= 0 && c.x < grid_width() && c.y >= 0 && c.y < grid_height();
    }
    bool is_aisle(Coord c) const {
        return in_grid(c) && (c.x % 2 == 0 || c.y == 0 || c.y == rows_ + 1);
    }
    bool is_storage(Coord c) const { return location_at(c).has_value(); }

    // Precomputed loaded travel time between the station and each location.
    int station_distance(int location) const {
        return station_dist_[static_cast<std::size_t>(location)];
    }

    // Stable digest of the geometry; stamped into datasets and model files.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    int columns_ = 0;
    int rows_ = 0;
    Coord station_{};
    std::vector<Coord> cells_;
    std::vector<int> station_dist_;
    std::uint64_t fingerprint_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

// Shortest loaded path (aisle graph plus the two endpoints) at 1 cell/s.
// Endpoints may be storage cells, the station, or aisle cells.
int loaded_travel_time(const Layout& layout, Coord a, Coord b);

}  // namespace rmfs
