#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rmfs/rng.hpp"
#include "rmfs/sim.hpp"

namespace rmfs {

// A storage policy maps a decision point to one of the free locations.
class StoragePolicy {
public:
    virtual ~StoragePolicy() = default;
    virtual int decide(const SimState& state, const DecisionPoint& dp) = 0;
    virtual std::string name() const = 0;
    virtual bool deterministic() const = 0;
};

// Uniform choice among free locations, driven by the harness generator
// (never the state's own reveal stream).
class RandomPolicy final : public StoragePolicy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    int decide(const SimState& state, const DecisionPoint& dp) override;
    std::string name() const override { return "random"; }
    bool deterministic() const override { return false; }

private:
    Rng rng_;
};

// Closest open location by loaded travel time from the station.
class ColPolicy final : public StoragePolicy {
public:
    int decide(const SimState& state, const DecisionPoint& dp) override;
    std::string name() const override { return "col"; }
    bool deterministic() const override { return true; }
};

// Three demand classes (top 20% / next 30% / rest of shelves by popularity
// rank) mapped onto three zones of matching capacity ordered by loaded
// distance from the station. Stores into the carried shelf's zone, falling
// back outward then inward. Uniform demand collapses to a single class, i.e.
// the closest-open-location rule.
class ClassBasedPolicy final : public StoragePolicy {
public:
    int decide(const SimState& state, const DecisionPoint& dp) override;
    std::string name() const override { return "class"; }
    bool deterministic() const override { return true; }
};

// Minimizes storage leg plus the unloaded leg to the next retrieval; with no
// retrievable order pending it minimizes the storage leg alone.
class ShortestLegPolicy final : public StoragePolicy {
public:
    int decide(const SimState& state, const DecisionPoint& dp) override;
    std::string name() const override { return "sl"; }
    bool deterministic() const override { return true; }
};

// One-step lookahead with truncated rollouts: every feasible action is
// played on a frozen snapshot, the base policy runs for up to horizon-1
// further decisions, and the cheapest accumulated cycle time wins (ties to
// the lowest location id).
class RolloutPolicy final : public StoragePolicy {
public:
    RolloutPolicy(std::unique_ptr<StoragePolicy> base, int horizon);
    int decide(const SimState& state, const DecisionPoint& dp) override;
    std::string name() const override;
    bool deterministic() const override { return base_->deterministic(); }

private:
    std::unique_ptr<StoragePolicy> base_;
    int horizon_;
};

// Cycle time accumulated by playing `first_action`, then `base` for up to
// horizon-1 more decisions on a frozen copy of `state`. Exposed so tests and
// search code can evaluate candidate actions directly.
std::int64_t rollout_cost(const SimState& state, int first_action, StoragePolicy& base,
                          int horizon);

}  // namespace rmfs
