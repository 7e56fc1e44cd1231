#include "rmfs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmfs {

namespace {
constexpr std::int16_t kCarried = -1;
constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();
}  // namespace

SimState SimState::create(const SimConfig& cfg) {
    if (cfg.robots < 1) throw std::invalid_argument("sim: need at least one robot");
    if (cfg.picking_time < 0) throw std::invalid_argument("sim: picking_time must be >= 0");
    if (!(cfg.order_skew > 0.0) || cfg.order_skew > 1.0) {
        throw std::invalid_argument("sim: order_skew must be in (0, 1]");
    }
    const bool scripted = !cfg.scripted_orders.empty();
    if (!scripted && cfg.poisson_rate <= 0.0 && cfg.backlog < 1) {
        throw std::invalid_argument("sim: backlog must be >= 1");
    }

    SimState s;
    s.layout_ = std::make_shared<const Layout>(Layout::build(cfg.layout));
    s.cfg_ = cfg;
    s.rng_ = Rng(cfg.seed);

    const int locations = s.layout_->location_count();
    s.shelf_loc_.resize(static_cast<std::size_t>(locations));
    s.loc_shelf_.resize(static_cast<std::size_t>(locations));
    for (int i = 0; i < locations; ++i) {
        s.shelf_loc_[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(i);
        s.loc_shelf_[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(i);
    }
    s.reserved_.assign(static_cast<std::size_t>(locations), 0);

    s.robots_.resize(static_cast<std::size_t>(cfg.robots));
    for (auto& r : s.robots_) {
        r.phase = RobotPhase::Idle;
        r.pos = s.layout_->station();
        r.idle_since = 0;
    }

    if (scripted) {
        for (std::size_t i = 0; i < cfg.scripted_orders.size(); ++i) {
            const int shelf = cfg.scripted_orders[i];
            if (shelf < 0 || shelf >= locations) {
                throw std::invalid_argument("sim: scripted order targets unknown shelf");
            }
            s.insert_pending(Order{s.next_order_id_++, static_cast<std::int16_t>(shelf),
                                   0, static_cast<std::int64_t>(i)});
        }
    } else if (cfg.poisson_rate > 0.0) {
        const double gap = -std::log(s.rng_.uniform01_open_low()) / cfg.poisson_rate;
        s.next_arrival_at_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(gap)));
    } else {
        for (int i = 0; i < cfg.backlog; ++i) s.reveal_order();
    }
    s.sweep_idle_assignments();
    return s;
}

bool SimState::more_orders_can_arrive() const {
    if (frozen_) return false;
    if (!cfg_.scripted_orders.empty()) return false;  // all injected at creation
    if (cfg_.poisson_rate > 0.0) return true;
    return false;  // backlog mode replenishes at consumption, never from empty
}

int popularity_index(double u, double skew, int locations) {
    const double x = std::pow(u, 1.0 / skew);
    const int index = static_cast<int>(std::ceil(x * locations));
    return std::clamp(index, 1, locations);
}

Order SimState::reveal_order() {
    if (frozen_) throw std::logic_error("reveal_order: frozen states cannot reveal orders");
    const int index =
        popularity_index(rng_.uniform01_open_low(), cfg_.order_skew, layout_->location_count());
    // Popularity rank k maps to shelf id k-1: low ids are the hot shelves.
    Order o{next_order_id_++, static_cast<std::int16_t>(index - 1), clock_, clock_};
    insert_pending(o);
    ++stats_.orders_revealed;
    return o;
}

void SimState::add_order(int shelf, std::int64_t deadline) {
    if (shelf < 0 || shelf >= layout_->location_count()) {
        throw std::invalid_argument("add_order: unknown shelf");
    }
    insert_pending(Order{next_order_id_++, static_cast<std::int16_t>(shelf), clock_, deadline});
    sweep_idle_assignments();
}

void SimState::insert_pending(Order o) {
    const auto pos = std::upper_bound(
        pending_.begin(), pending_.end(), o, [](const Order& a, const Order& b) {
            if (a.deadline != b.deadline) return a.deadline < b.deadline;
            return a.id < b.id;
        });
    pending_.insert(pos, o);
}

Order SimState::consume_pending(std::size_t index) {
    const Order o = pending_[index];
    pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(index));
    if (!frozen_ && cfg_.scripted_orders.empty() && cfg_.poisson_rate <= 0.0) {
        reveal_order();  // keep the backlog constant
    }
    return o;
}

int SimState::earliest_retrievable(int carried_shelf_of) const {
    const std::int16_t carried =
        carried_shelf_of >= 0 ? robots_[static_cast<std::size_t>(carried_shelf_of)].carried_shelf
                              : kCarried;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
        const std::int16_t shelf = pending_[i].shelf;
        if (carried >= 0 && shelf == carried) return static_cast<int>(i);
        if (shelf_loc_[static_cast<std::size_t>(shelf)] != kCarried &&
            !reserved_[static_cast<std::size_t>(shelf)]) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

void SimState::sweep_idle_assignments() {
    for (;;) {
        const int oi = earliest_retrievable(-1);
        if (oi < 0) return;

        int best = -1;
        for (std::size_t r = 0; r < robots_.size(); ++r) {
            if (robots_[r].phase != RobotPhase::Idle) continue;
            if (best < 0 ||
                robots_[r].idle_since < robots_[static_cast<std::size_t>(best)].idle_since) {
                best = static_cast<int>(r);
            }
        }
        if (best < 0) return;

        const Order o = consume_pending(static_cast<std::size_t>(oi));
        const std::int16_t loc = shelf_loc_[static_cast<std::size_t>(o.shelf)];
        reserved_[static_cast<std::size_t>(o.shelf)] = 1;
        Robot& rb = robots_[static_cast<std::size_t>(best)];
        rb.phase = RobotPhase::Interleaving;
        rb.retrieve_from = loc;
        rb.busy_until = clock_ + unloaded_travel_time(rb.pos, layout_->cell(loc));
    }
}

void SimState::maybe_start_pick() {
    if (picking_robot_ >= 0 || station_queue_.empty()) return;
    picking_robot_ = station_queue_.front();
    station_queue_.erase(station_queue_.begin());
    pick_done_at_ = clock_ + cfg_.picking_time;
}

void SimState::handle_robot_event(int robot_id) {
    Robot& rb = robots_[static_cast<std::size_t>(robot_id)];
    switch (rb.phase) {
        case RobotPhase::Storing: {
            const std::int16_t loc = rb.store_target;
            loc_shelf_[static_cast<std::size_t>(loc)] = rb.carried_shelf;
            shelf_loc_[static_cast<std::size_t>(rb.carried_shelf)] = loc;
            rb.carried_shelf = kCarried;
            rb.store_target = -1;
            rb.pos = layout_->cell(loc);
            if (rb.retrieve_from >= 0) {
                rb.phase = RobotPhase::Interleaving;
                rb.busy_until =
                    clock_ + unloaded_travel_time(rb.pos, layout_->cell(rb.retrieve_from));
            } else {
                rb.phase = RobotPhase::Idle;
                rb.idle_since = clock_;
            }
            // The drop may make waiting orders retrievable.
            sweep_idle_assignments();
            break;
        }
        case RobotPhase::Interleaving: {
            const std::int16_t loc = rb.retrieve_from;
            const std::int16_t shelf = loc_shelf_[static_cast<std::size_t>(loc)];
            loc_shelf_[static_cast<std::size_t>(loc)] = -1;
            shelf_loc_[static_cast<std::size_t>(shelf)] = kCarried;
            reserved_[static_cast<std::size_t>(shelf)] = 0;
            free_locs_.insert(std::lower_bound(free_locs_.begin(), free_locs_.end(), loc), loc);
            rb.carried_shelf = shelf;
            rb.retrieve_from = -1;
            rb.pos = layout_->cell(loc);
            rb.phase = RobotPhase::Retrieving;
            rb.busy_until = clock_ + layout_->station_distance(loc);
            break;
        }
        case RobotPhase::Retrieving: {
            rb.pos = layout_->station();
            rb.phase = RobotPhase::Queued;
            station_queue_.push_back(static_cast<std::int16_t>(robot_id));
            maybe_start_pick();
            break;
        }
        default:
            throw std::logic_error("sim: event fired for a robot with no pending leg");
    }
}

int SimState::pick_next_event_kind(std::int64_t& t, int& robot_id) const {
    // Priority at equal timestamps: arrivals, then robot legs by id, then the
    // pick completion, so a decision point always sees that second's updates.
    t = kNever;
    int kind = -1;
    robot_id = -1;
    if (next_arrival_at_ >= 0 && next_arrival_at_ < t) {
        t = next_arrival_at_;
        kind = 0;
    }
    for (std::size_t r = 0; r < robots_.size(); ++r) {
        const RobotPhase p = robots_[r].phase;
        if (p == RobotPhase::Storing || p == RobotPhase::Interleaving ||
            p == RobotPhase::Retrieving) {
            if (robots_[r].busy_until < t) {
                t = robots_[r].busy_until;
                kind = 1;
                robot_id = static_cast<int>(r);
            }
        }
    }
    if (picking_robot_ >= 0 && pick_done_at_ < t) {
        t = pick_done_at_;
        kind = 2;
        robot_id = -1;
    }
    return kind;
}

std::optional<DecisionPoint> SimState::advance() {
    if (decision_robot_ >= 0) {
        throw std::logic_error("advance: previous decision was not applied");
    }
    for (;;) {
        if (cfg_.action_budget >= 0 && stats_.actions >= cfg_.action_budget) return std::nullopt;
        if (pending_.empty() && !more_orders_can_arrive()) return std::nullopt;

        std::int64_t t = 0;
        int robot_id = -1;
        const int kind = pick_next_event_kind(t, robot_id);
        if (kind < 0) {
            throw std::runtime_error("sim: deadlock — no event can fire (bad configuration)");
        }
        clock_ = t;

        if (kind == 0) {
            reveal_order();
            const double gap = -std::log(rng_.uniform01_open_low()) / cfg_.poisson_rate;
            next_arrival_at_ =
                clock_ + std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(gap)));
            sweep_idle_assignments();
            continue;
        }
        if (kind == 1) {
            handle_robot_event(robot_id);
            continue;
        }

        // Pick completed: the served robot keeps its shelf and either reuses
        // it for the earliest retrievable order (opportunistic, no travel) or
        // needs a storage decision.
        const int rid = picking_robot_;
        picking_robot_ = -1;
        Robot& rb = robots_[static_cast<std::size_t>(rid)];
        const int oi = earliest_retrievable(rid);
        if (oi >= 0 && pending_[static_cast<std::size_t>(oi)].shelf == rb.carried_shelf) {
            consume_pending(static_cast<std::size_t>(oi));
            ++stats_.opportunistic_tasks;
            station_queue_.push_back(static_cast<std::int16_t>(rid));
            maybe_start_pick();
            continue;
        }
        maybe_start_pick();  // the station keeps serving while the decision is made
        decision_robot_ = static_cast<std::int16_t>(rid);
        return DecisionPoint{rid};
    }
}

CycleOutcome SimState::apply_action(int location) {
    if (decision_robot_ < 0) throw std::logic_error("apply_action: no decision pending");
    const auto it = std::lower_bound(free_locs_.begin(), free_locs_.end(),
                                     static_cast<std::int16_t>(location));
    if (it == free_locs_.end() || *it != location) {
        throw std::invalid_argument("apply_action: location is not free");
    }
    free_locs_.erase(it);

    Robot& rb = robots_[static_cast<std::size_t>(decision_robot_)];
    rb.phase = RobotPhase::Storing;
    rb.store_target = static_cast<std::int16_t>(location);
    const std::int64_t storage_leg = layout_->station_distance(location);
    rb.busy_until = clock_ + storage_leg;

    std::int64_t cycle = storage_leg;
    const int oi = earliest_retrievable(-1);
    if (oi >= 0) {
        const Order o = consume_pending(static_cast<std::size_t>(oi));
        const std::int16_t rloc = shelf_loc_[static_cast<std::size_t>(o.shelf)];
        reserved_[static_cast<std::size_t>(o.shelf)] = 1;
        rb.retrieve_from = rloc;
        cycle += unloaded_travel_time(layout_->cell(location), layout_->cell(rloc));
        cycle += layout_->station_distance(rloc);
    } else {
        rb.retrieve_from = -1;
    }

    stats_.cycle_seconds += cycle;
    ++stats_.actions;
    decision_robot_ = -1;
    return CycleOutcome{cycle, false};
}

std::optional<int> SimState::next_retrieval_location() const {
    const int oi = earliest_retrievable(-1);
    if (oi < 0) return std::nullopt;
    return shelf_loc_[static_cast<std::size_t>(pending_[static_cast<std::size_t>(oi)].shelf)];
}

std::uint64_t SimState::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    const auto put = [&h](std::uint64_t v) { h = mix_seed(h, v); };
    put(static_cast<std::uint64_t>(clock_));
    put(frozen_ ? 1 : 0);
    for (const auto v : shelf_loc_) put(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
    for (const auto v : reserved_) put(v);
    for (const auto v : free_locs_) put(static_cast<std::uint64_t>(v));
    for (const auto& r : robots_) {
        put(static_cast<std::uint64_t>(r.phase));
        put(static_cast<std::uint64_t>(static_cast<std::int64_t>(r.carried_shelf)));
        put(static_cast<std::uint64_t>(r.busy_until));
        put(static_cast<std::uint64_t>(r.pos.x) << 32 | static_cast<std::uint32_t>(r.pos.y));
        put(static_cast<std::uint64_t>(static_cast<std::int64_t>(r.store_target)));
        put(static_cast<std::uint64_t>(static_cast<std::int64_t>(r.retrieve_from)));
        put(static_cast<std::uint64_t>(r.idle_since));
    }
    for (const auto v : station_queue_) put(static_cast<std::uint64_t>(v));
    put(static_cast<std::uint64_t>(static_cast<std::int64_t>(picking_robot_)));
    put(static_cast<std::uint64_t>(pick_done_at_));
    for (const auto& o : pending_) {
        put(static_cast<std::uint64_t>(o.id));
        put(static_cast<std::uint64_t>(static_cast<std::int64_t>(o.shelf)));
        put(static_cast<std::uint64_t>(o.deadline));
    }
    put(static_cast<std::uint64_t>(next_order_id_));
    put(static_cast<std::uint64_t>(stats_.cycle_seconds));
    put(static_cast<std::uint64_t>(stats_.actions));
    put(static_cast<std::uint64_t>(stats_.opportunistic_tasks));
    put(static_cast<std::uint64_t>(static_cast<std::int64_t>(decision_robot_)));
    for (int i = 0; i < 4; ++i) put(rng_.word(i));
    return h;
}

void SimState::validate() const {
    const int locations = layout_->location_count();
    int stored = 0;
    for (int loc = 0; loc < locations; ++loc) {
        const int shelf = loc_shelf_[static_cast<std::size_t>(loc)];
        if (shelf >= 0) {
            ++stored;
            if (shelf_loc_[static_cast<std::size_t>(shelf)] != loc) {
                throw std::logic_error("validate: shelf/location maps disagree");
            }
        }
    }
    int carried = 0;
    for (const auto& r : robots_) {
        if (r.carried_shelf >= 0) {
            ++carried;
            if (shelf_loc_[static_cast<std::size_t>(r.carried_shelf)] != kCarried) {
                throw std::logic_error("validate: carried shelf still mapped to a location");
            }
            const bool may_carry = r.phase == RobotPhase::Queued ||
                                   r.phase == RobotPhase::Storing ||
                                   r.phase == RobotPhase::Retrieving;
            if (!may_carry) throw std::logic_error("validate: phase cannot carry a shelf");
        }
    }
    if (stored + carried != locations) {
        throw std::logic_error("validate: shelves were created or destroyed");
    }
    if (static_cast<int>(free_locs_.size()) > static_cast<int>(robots_.size())) {
        throw std::logic_error("validate: more free locations than robots");
    }
    for (std::size_t i = 0; i < free_locs_.size(); ++i) {
        if (loc_shelf_[static_cast<std::size_t>(free_locs_[i])] != -1) {
            throw std::logic_error("validate: free location is occupied");
        }
        if (i > 0 && free_locs_[i - 1] >= free_locs_[i]) {
            throw std::logic_error("validate: free list not strictly ascending");
        }
    }
    for (std::size_t i = 1; i < pending_.size(); ++i) {
        const Order& a = pending_[i - 1];
        const Order& b = pending_[i];
        if (a.deadline > b.deadline || (a.deadline == b.deadline && a.id >= b.id)) {
            throw std::logic_error("validate: pending orders out of order");
        }
    }
}

}  // namespace rmfs
