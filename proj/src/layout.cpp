#include "rmfs/layout.hpp"

#include <queue>
#include <stdexcept>

#include "rmfs/rng.hpp"

namespace rmfs {

Layout Layout::build(const LayoutConfig& cfg) {
    if (cfg.columns < 1 || cfg.rows < 1) {
        throw std::invalid_argument("layout: columns and rows must be >= 1");
    }
    Layout out;
    out.columns_ = cfg.columns;
    out.rows_ = cfg.rows;
    out.station_ = cfg.station.value_or(Coord{cfg.columns, 0});
    if (!out.is_aisle(out.station_)) {
        throw std::invalid_argument("layout: station must be on an aisle cell");
    }

    out.cells_.reserve(static_cast<std::size_t>(cfg.columns) * cfg.rows);
    for (int col = 0; col < cfg.columns; ++col) {
        for (int y = 1; y <= cfg.rows; ++y) {
            out.cells_.push_back(Coord{2 * col + 1, y});
        }
    }

    out.station_dist_.resize(out.cells_.size());
    for (std::size_t i = 0; i < out.cells_.size(); ++i) {
        out.station_dist_[i] = loaded_travel_time(out, out.station_, out.cells_[i]);
    }

    std::uint64_t h = 0x243f6a8885a308d3ULL;
    h = mix_seed(h, static_cast<std::uint64_t>(cfg.columns));
    h = mix_seed(h, static_cast<std::uint64_t>(cfg.rows));
    h = mix_seed(h, static_cast<std::uint64_t>(out.station_.x) << 32 |
                        static_cast<std::uint64_t>(out.station_.y));
    out.fingerprint_ = h;
    return out;
}

std::optional<int> Layout::location_at(Coord c) const {
    if (!in_grid(c) || c.x % 2 == 0 || c.y < 1 || c.y > rows_) return std::nullopt;
    const int col = (c.x - 1) / 2;
    return col * rows_ + (c.y - 1);
}

int loaded_travel_time(const Layout& layout, Coord a, Coord b) {
    if (a == b) return 0;
    const auto passable = [&](Coord c) { return layout.is_aisle(c) || c == a || c == b; };
    const auto valid_endpoint = [&](Coord c) {
        return layout.in_grid(c) && (layout.is_aisle(c) || layout.is_storage(c));
    };
    if (!valid_endpoint(a) || !valid_endpoint(b)) {
        throw std::invalid_argument(
            "loaded_travel_time: endpoints must be station, aisle or storage cells");
    }

    const int w = layout.grid_width();
    const int hgt = layout.grid_height();
    std::vector<int> dist(static_cast<std::size_t>(w) * hgt, -1);
    const auto idx = [&](Coord c) { return static_cast<std::size_t>(c.y) * w + c.x; };

    std::queue<Coord> q;
    dist[idx(a)] = 0;
    q.push(a);
    while (!q.empty()) {
        const Coord c = q.front();
        q.pop();
        if (c == b) return dist[idx(c)];
        const Coord nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
        for (const Coord n : nbrs) {
            if (!layout.in_grid(n) || !passable(n)) continue;
            if (dist[idx(n)] >= 0) continue;
            dist[idx(n)] = dist[idx(c)] + 1;
            q.push(n);
        }
    }
    // Unreachable pairs cannot occur on a well-formed layout.
    throw std::logic_error("loaded_travel_time: no path between endpoints");
}

}  // namespace rmfs
