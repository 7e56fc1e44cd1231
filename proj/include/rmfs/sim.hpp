#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmfs/layout.hpp"
#include "rmfs/rng.hpp"

namespace rmfs {

struct SimConfig {
    LayoutConfig layout{};
    int robots = 5;
    // Constant-backlog order stream: one new order revealed per order
    // consumed, keeping the pending list at this size.
    int backlog = 60;
    // When > 0, orders instead arrive as a Poisson process with this rate
    // (orders per second, integer-second granularity).
    double poisson_rate = 0.0;
    // Demand skew exponent s of the popularity CDF G(x) = x^s, 0 < s <= 1.
    double order_skew = 0.7;
    int picking_time = 5;
    std::uint64_t seed = 1;
    // Number of storage actions before the run ends; < 0 means unbounded.
    std::int64_t action_budget = -1;
    // When nonempty, the exact order stream to use (shelf ids, FIFO
    // deadlines). Disables random reveals entirely; used by tests/replays.
    std::vector<std::int16_t> scripted_orders{};
};

struct Order {
    std::int64_t id = 0;
    std::int16_t shelf = -1;
    std::int64_t reveal_time = 0;
    std::int64_t deadline = 0;
};

// Inverse-CDF draw for the popularity distribution G(x) = x^skew: maps a
// uniform u in (0, 1] to a 1-based popularity rank in [1, locations].
int popularity_index(double u, double skew, int locations);

enum class RobotPhase : std::uint8_t {
    Queued,        // waiting at / being served by the picking station
    Storing,       // loaded, driving to the chosen storage location
    Interleaving,  // unloaded, driving to its assigned retrieval
    Retrieving,    // loaded, bringing a shelf back to the station
    Idle,          // parked unloaded, waiting for an assignable order
};

struct Robot {
    RobotPhase phase = RobotPhase::Idle;
    std::int16_t carried_shelf = -1;
    std::int64_t busy_until = 0;
    Coord pos{};
    std::int16_t store_target = -1;
    std::int16_t retrieve_from = -1;
    std::int64_t idle_since = 0;
};

struct Stats {
    std::int64_t cycle_seconds = 0;       // sum of storage-action cycle times
    std::int64_t actions = 0;             // storage decisions applied
    std::int64_t opportunistic_tasks = 0; // carried-shelf reuses (zero cost)
    std::int64_t orders_revealed = 0;
};

struct CycleOutcome {
    std::int64_t cycle_time = 0;
    bool opportunistic = false;
};

struct DecisionPoint {
    int robot = -1;
};

// Deterministic discrete-event model of a single-station mobile-shelf
// warehouse. Every shelf occupies a storage location unless a robot carries
// it; a robot released by the picker must be told where to store its shelf,
// which is the only decision the simulation exposes.
//
// A state is confined to one thread, but copies are fully independent, so
// lookahead methods snapshot() and explore alternative futures. Snapshots
// are frozen: they can never reveal a new order.
class SimState {
public:
    // Empty placeholder; only assignment or create() make it usable.
    SimState() : rng_(0) {}

    static SimState create(const SimConfig& cfg);

    // Independent frozen copy; mutations never touch the original.
    SimState snapshot() const {
        SimState copy(*this);
        copy.frozen_ = true;
        return copy;
    }
    bool frozen() const { return frozen_; }

    // Runs events (travel legs, lifts, drops, picks, opportunistic reuses)
    // until a robot needs a storage decision. Empty result = simulation end
    // (action budget exhausted, or no pending order remains and none can
    // arrive).
    std::optional<DecisionPoint> advance();

    // Dispatches the deciding robot to store its shelf at `location`, and
    // immediately assigns it the earliest retrievable pending order (if
    // any), fixing all three travel legs of the cycle.
    CycleOutcome apply_action(int location);

    // Draws a shelf from the popularity distribution and appends an order
    // with a FIFO deadline. Live states only.
    Order reveal_order();

    // Priority insertion with an explicit deadline, for custom scenarios.
    void add_order(int shelf, std::int64_t deadline);

    const Layout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    const SimConfig& config() const { return cfg_; }
    std::int64_t clock() const { return clock_; }
    const Stats& stats() const { return stats_; }

    std::span<const std::int16_t> free_locations() const { return free_locs_; }
    const std::vector<Order>& pending_orders() const { return pending_; }
    const std::vector<Robot>& robots() const { return robots_; }
    int decision_robot() const { return decision_robot_; }

    // -1 when the shelf is carried.
    int location_of_shelf(int shelf) const { return shelf_loc_[static_cast<std::size_t>(shelf)]; }
    int shelf_at(int location) const { return loc_shelf_[static_cast<std::size_t>(location)]; }
    bool shelf_reserved(int shelf) const { return reserved_[static_cast<std::size_t>(shelf)] != 0; }

    // Location the deciding robot's next retrieval would come from, i.e. the
    // earliest-deadline pending order whose shelf is stored and unreserved.
    std::optional<int> next_retrieval_location() const;

    // Digest of the full dynamic state; equal states hash equal.
    std::uint64_t hash() const;

    // Throws when a structural invariant is broken. Test/debug aid.
    void validate() const;

private:
    bool more_orders_can_arrive() const;
    void maybe_start_pick();
    void sweep_idle_assignments();
    int earliest_retrievable(int carried_shelf_of) const;  // index into pending_, -1 if none
    Order consume_pending(std::size_t index);
    void insert_pending(Order o);
    void handle_robot_event(int robot_id);
    int pick_next_event_kind(std::int64_t& t, int& robot_id) const;

    LayoutPtr layout_;
    SimConfig cfg_;
    bool frozen_ = false;
    std::int64_t clock_ = 0;

    std::vector<std::int16_t> shelf_loc_;   // shelf -> location, -1 = carried
    std::vector<std::int16_t> loc_shelf_;   // location -> shelf, -1 = empty
    std::vector<std::uint8_t> reserved_;    // shelf committed to an in-flight retrieval
    std::vector<std::int16_t> free_locs_;   // ascending location ids

    std::vector<Robot> robots_;
    std::vector<std::int16_t> station_queue_;  // waiting robots, FIFO; excludes the one being served
    std::int16_t picking_robot_ = -1;
    std::int64_t pick_done_at_ = 0;

    std::vector<Order> pending_;  // sorted by (deadline, id)
    std::int64_t next_order_id_ = 0;
    std::int64_t next_arrival_at_ = -1;  // Poisson mode only

    Rng rng_;
    Stats stats_;
    std::int16_t decision_robot_ = -1;
};

}  // namespace rmfs
