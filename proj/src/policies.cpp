#include "rmfs/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmfs {

namespace {

std::span<const std::int16_t> feasible_or_throw(const SimState& state) {
    const auto free = state.free_locations();
    if (free.empty()) throw std::logic_error("policy: no feasible action");
    return free;
}

}  // namespace

int RandomPolicy::decide(const SimState& state, const DecisionPoint&) {
    const auto free = feasible_or_throw(state);
    return free[static_cast<std::size_t>(rng_.below(free.size()))];
}

int ColPolicy::decide(const SimState& state, const DecisionPoint&) {
    const auto free = feasible_or_throw(state);
    int best = free[0];
    int best_d = state.layout().station_distance(best);
    for (const int loc : free.subspan(1)) {
        const int d = state.layout().station_distance(loc);
        if (d < best_d) {
            best = loc;
            best_d = d;
        }
    }
    return best;  // free list is ascending, so ties keep the lowest id
}

int ClassBasedPolicy::decide(const SimState& state, const DecisionPoint& dp) {
    const auto free = feasible_or_throw(state);
    const Layout& layout = state.layout();
    const int locations = layout.location_count();

    // Uniform demand: every shelf has the same rate, one class, one zone.
    if (state.config().order_skew >= 1.0) {
        ColPolicy col;
        return col.decide(state, dp);
    }

    const int c1 = std::max<int>(1, static_cast<int>(std::lround(0.2 * locations)));
    const int c2 = std::max<int>(1, static_cast<int>(std::lround(0.3 * locations)));
    const auto shelf_class = [&](int shelf) {
        if (shelf < c1) return 0;
        if (shelf < c1 + c2) return 1;
        return 2;
    };
    // Zone of a location = its rank by (station distance, id) cut at the
    // class capacities. Ranks are recomputed per call; layouts are small.
    std::vector<int> by_dist(static_cast<std::size_t>(locations));
    for (int i = 0; i < locations; ++i) by_dist[static_cast<std::size_t>(i)] = i;
    std::sort(by_dist.begin(), by_dist.end(), [&](int a, int b) {
        const int da = layout.station_distance(a);
        const int db = layout.station_distance(b);
        if (da != db) return da < db;
        return a < b;
    });
    std::vector<int> zone_of(static_cast<std::size_t>(locations));
    for (int rank = 0; rank < locations; ++rank) {
        const int z = rank < c1 ? 0 : rank < c1 + c2 ? 1 : 2;
        zone_of[static_cast<std::size_t>(by_dist[static_cast<std::size_t>(rank)])] = z;
    }

    const int carried = state.robots()[static_cast<std::size_t>(dp.robot)].carried_shelf;
    const int home = shelf_class(carried);

    const auto closest_in_zone = [&](int z) -> int {
        int best = -1;
        int best_d = std::numeric_limits<int>::max();
        for (const int loc : free) {
            if (zone_of[static_cast<std::size_t>(loc)] != z) continue;
            const int d = layout.station_distance(loc);
            if (d < best_d) {
                best = loc;
                best_d = d;
            }
        }
        return best;
    };
    for (int z = home; z <= 2; ++z) {  // own zone, then outward
        const int loc = closest_in_zone(z);
        if (loc >= 0) return loc;
    }
    for (int z = home - 1; z >= 0; --z) {  // then inward
        const int loc = closest_in_zone(z);
        if (loc >= 0) return loc;
    }
    throw std::logic_error("class policy: zones exhausted with free locations present");
}

int ShortestLegPolicy::decide(const SimState& state, const DecisionPoint&) {
    const auto free = feasible_or_throw(state);
    const Layout& layout = state.layout();
    const auto retrieval = state.next_retrieval_location();

    int best = free[0];
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    for (const int loc : free) {
        std::int64_t cost = layout.station_distance(loc);
        if (retrieval) {
            cost += unloaded_travel_time(layout.cell(loc), layout.cell(*retrieval));
        }
        if (cost < best_cost) {
            best = loc;
            best_cost = cost;
        }
    }
    return best;
}

RolloutPolicy::RolloutPolicy(std::unique_ptr<StoragePolicy> base, int horizon)
    : base_(std::move(base)), horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
}

std::string RolloutPolicy::name() const {
    return base_->name() + "+rollout:h=" + std::to_string(horizon_);
}

std::int64_t rollout_cost(const SimState& state, int first_action, StoragePolicy& base,
                          int horizon) {
    SimState sim = state.snapshot();
    std::int64_t total = sim.apply_action(first_action).cycle_time;
    for (int step = 1; step < horizon; ++step) {
        const auto dp = sim.advance();
        if (!dp) break;  // revealed orders exhausted
        const int action = base.decide(sim, *dp);
        total += sim.apply_action(action).cycle_time;
    }
    return total;
}

int RolloutPolicy::decide(const SimState& state, const DecisionPoint&) {
    const auto free = feasible_or_throw(state);
    if (free.size() == 1) return free[0];

    int best = free[0];
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    for (const int loc : free) {
        const std::int64_t cost = rollout_cost(state, loc, *base_, horizon_);
        if (cost < best_cost) {
            best = loc;
            best_cost = cost;
        }
    }
    return best;
}

}  // namespace rmfs
