#include <doctest.h>

#include <deque>
#include <map>
#include <set>

#include "rmfs/layout.hpp"

using namespace rmfs;

namespace {

// Independent shortest-path oracle for loaded travel: flood fill over cells
// that are aisles by definition (even x, or one of the two border rows) plus
// the two endpoints.
int oracle_loaded_distance(int columns, int rows, Coord a, Coord b) {
    const auto aisle = [&](Coord c) {
        return c.x % 2 == 0 || c.y == 0 || c.y == rows + 1;
    };
    const auto inside = [&](Coord c) {
        return c.x >= 0 && c.x <= 2 * columns && c.y >= 0 && c.y <= rows + 1;
    };
    std::map<std::pair<int, int>, int> dist;
    std::deque<Coord> queue{a};
    dist[{a.x, a.y}] = 0;
    while (!queue.empty()) {
        const Coord c = queue.front();
        queue.pop_front();
        if (c == b) return dist[{c.x, c.y}];
        for (const Coord n : {Coord{c.x + 1, c.y}, Coord{c.x - 1, c.y}, Coord{c.x, c.y + 1},
                              Coord{c.x, c.y - 1}}) {
            if (!inside(n)) continue;
            if (!aisle(n) && !(n == b)) continue;
            if (dist.count({n.x, n.y})) continue;
            dist[{n.x, n.y}] = dist[{c.x, c.y}] + 1;
            queue.push_back(n);
        }
    }
    return -1;
}

}  // namespace

TEST_SUITE("layout") {

TEST_CASE("default six-by-six geometry") {
    const Layout layout = Layout::build({});
    CHECK(layout.location_count() == 36);
    CHECK(layout.station() == Coord{6, 0});
    // Columns at odd x, rows 1..6.
    std::set<std::pair<int, int>> coords;
    for (int i = 0; i < 36; ++i) {
        const Coord c = layout.cell(i);
        CHECK(c.x % 2 == 1);
        CHECK(c.y >= 1);
        CHECK(c.y <= 6);
        coords.insert({c.x, c.y});
    }
    CHECK(coords.size() == 36);  // all distinct
    CHECK(layout.is_aisle(Coord{0, 3}));
    CHECK(layout.is_aisle(Coord{12, 7}));
    CHECK(layout.is_aisle(Coord{3, 0}));
    CHECK(!layout.is_aisle(Coord{3, 2}));
}

TEST_CASE("two-by-three layout matches the six-location example") {
    const Layout layout = Layout::build({.columns = 2, .rows = 3});
    const std::set<std::pair<int, int>> expect = {{1, 1}, {1, 2}, {1, 3},
                                                  {3, 1}, {3, 2}, {3, 3}};
    std::set<std::pair<int, int>> got;
    for (int i = 0; i < layout.location_count(); ++i) {
        got.insert({layout.cell(i).x, layout.cell(i).y});
    }
    CHECK(got == expect);
    // Ids ascend column-major: (1,1) first, (3,3) last.
    CHECK(layout.cell(0) == Coord{1, 1});
    CHECK(layout.cell(5) == Coord{3, 3});
    CHECK(layout.location_at(Coord{3, 2}) == 4);
}

TEST_CASE("single-cell layout") {
    const Layout layout = Layout::build({.columns = 1, .rows = 1});
    CHECK(layout.location_count() == 1);
    CHECK(layout.cell(0) == Coord{1, 1});
    CHECK(layout.is_aisle(Coord{0, 1}));
    CHECK(layout.is_aisle(Coord{2, 1}));
    CHECK(layout.is_aisle(Coord{1, 0}));
    CHECK(layout.is_aisle(Coord{1, 2}));
}

TEST_CASE("rejects bad configurations") {
    CHECK_THROWS_AS(Layout::build({.columns = 0, .rows = 3}), std::invalid_argument);
    CHECK_THROWS_AS(Layout::build({.columns = 3, .rows = -1}), std::invalid_argument);
    // Station on a storage cell is not an aisle.
    CHECK_THROWS_AS(Layout::build({.columns = 2, .rows = 3, .station = Coord{1, 2}}),
                    std::invalid_argument);
}

TEST_CASE("every storage cell touches an aisle") {
    for (const auto [cols, rows] : {std::pair{1, 1}, {2, 3}, {6, 6}, {4, 9}}) {
        const Layout layout = Layout::build({.columns = cols, .rows = rows});
        for (int i = 0; i < layout.location_count(); ++i) {
            const Coord c = layout.cell(i);
            const bool touches =
                layout.is_aisle({c.x + 1, c.y}) || layout.is_aisle({c.x - 1, c.y}) ||
                layout.is_aisle({c.x, c.y + 1}) || layout.is_aisle({c.x, c.y - 1});
            CHECK(touches);
        }
    }
}

TEST_CASE("unloaded travel is Manhattan distance") {
    CHECK(unloaded_travel_time({1, 1}, {1, 1}) == 0);
    CHECK(unloaded_travel_time({1, 1}, {3, 3}) == 4);
    CHECK(unloaded_travel_time({6, 0}, {1, 6}) == 11);
}

TEST_CASE("loaded travel routes around storage columns") {
    const Layout layout = Layout::build({});
    CHECK(loaded_travel_time(layout, {1, 1}, {1, 1}) == 0);
    // Within a column the robot must detour through an aisle.
    CHECK(loaded_travel_time(layout, {1, 1}, {1, 3}) == 4);
    CHECK(loaded_travel_time(layout, {6, 0}, {1, 1}) == 6);
}

TEST_CASE("loaded travel agrees with an independent flood fill") {
    for (const auto [cols, rows] : {std::pair{2, 3}, {6, 6}, {3, 5}}) {
        const Layout layout = Layout::build({.columns = cols, .rows = rows});
        for (int i = 0; i < layout.location_count(); ++i) {
            const int direct = loaded_travel_time(layout, layout.station(), layout.cell(i));
            CHECK(direct == oracle_loaded_distance(cols, rows, layout.station(), layout.cell(i)));
            CHECK(layout.station_distance(i) == direct);
            CHECK(direct >= 1);
        }
        // A few cell-to-cell pairs as well.
        for (int i = 0; i < layout.location_count(); i += 5) {
            for (int j = 0; j < layout.location_count(); j += 7) {
                CHECK(loaded_travel_time(layout, layout.cell(i), layout.cell(j)) ==
                      oracle_loaded_distance(cols, rows, layout.cell(i), layout.cell(j)));
            }
        }
    }
}

TEST_CASE("fingerprint tracks geometry") {
    const Layout a = Layout::build({});
    const Layout b = Layout::build({});
    const Layout c = Layout::build({.columns = 2, .rows = 3});
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
}

}  // TEST_SUITE
