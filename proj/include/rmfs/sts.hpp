#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rmfs/policies.hpp"
#include "rmfs/predictor.hpp"
#include "rmfs/sim.hpp"

namespace rmfs {

struct StsParams {
    int h_max = 30;
    int trajectories = 100;
    double eta = 0.1;    // interpolation toward uniform, in [0, 1]
    double gamma = 1.0;  // discount on downstream returns
};

// Pulls every prediction toward 0.5 by a factor eta and renormalizes over
// the siblings. Strictly increasing for eta < 1, so the ranking of actions
// is preserved while zero-probability actions stay reachable. eta = 0 is
// the identity, eta = 1 collapses to uniform.
std::vector<double> transform_preds(std::span<const double> preds, double eta);

struct StsPop {
    double prob = 0.0;
    int depth = 0;
    std::int16_t action = -1;
};

// Diagnostics for invariant tests: pop order, and the probability mass split
// between still-open nodes and trajectory endpoints after each descent.
struct StsTrace {
    std::vector<StsPop> pops;
    std::vector<double> open_mass;
    std::vector<double> terminal_mass;
    int trajectories = 0;
};

// Best-first tree search guided by the action classifier. Each descent
// greedily follows the highest transformed prediction to the depth limit,
// scoring every step; siblings that were not taken become "open" nodes whose
// visit probability is the product of transformed predictions along their
// path. The next descent starts from the open node with the highest visit
// probability (ties: shallower depth, then lower action id). Returns
// backpropagate as a running minimum of reward + gamma * downstream return.
// The chosen root action minimizes that value; nodes no trajectory reached
// keep an infinite value and are never chosen while a finite one exists.
class StsSearch {
public:
    StsSearch(const SimState& at_decision, StsParams params, const ActionPredictor& predictor);

    int run(StsTrace* trace = nullptr);

    struct Node {
        std::int16_t action = -1;
        int parent = -1;
        int depth = 0;
        double prob = 0.0;
        double pred_prime = 0.0;
        double reward = 0.0;  // cycle time of the action leading here
        double value = 0.0;   // best discounted return from this node
        bool activated = false;
        bool terminal = false;
        std::vector<int> children;
        std::optional<SimState> state;  // kept while descendants may need it
    };

    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    int root() const { return 0; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    void activate(int index);
    void descend(int index);
    void backprop(int index, double ret);

    StsParams params_;
    const ActionPredictor& predictor_;
    std::vector<Node> nodes_;
    double terminal_mass_ = 0.0;  // probability of trajectory endpoints so far
    // Open set keyed by (prob desc, depth asc, action asc, index asc).
    struct OpenKey {
        double neg_prob;
        int depth;
        std::int16_t action;
        int index;
        bool operator<(const OpenKey& o) const {
            if (neg_prob != o.neg_prob) return neg_prob < o.neg_prob;
            if (depth != o.depth) return depth < o.depth;
            if (action != o.action) return action < o.action;
            return index < o.index;
        }
    };
    std::vector<OpenKey> open_;  // heap-ordered via std::push_heap on >
};

int sts_decide(const SimState& at_decision, const StsParams& params,
               const ActionPredictor& predictor, StsTrace* trace = nullptr);

class StsPolicy final : public StoragePolicy {
public:
    StsPolicy(StsParams params, ActionPredictor predictor)
        : params_(params), predictor_(std::move(predictor)) {}
    int decide(const SimState& state, const DecisionPoint&) override {
        return sts_decide(state, params_, predictor_);
    }
    std::string name() const override;
    bool deterministic() const override { return true; }

private:
    StsParams params_;
    ActionPredictor predictor_;
};

}  // namespace rmfs
