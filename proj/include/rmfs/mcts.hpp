#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rmfs/policies.hpp"
#include "rmfs/predictor.hpp"
#include "rmfs/rng.hpp"
#include "rmfs/sim.hpp"

namespace rmfs {

struct MctsParams {
    int horizon = 30;
    int trajectories = 100;
    double exploration = 1.0 / 16.0;
};

// Child score under the adapted bandit rule: 1/mean_i keeps exploitation in
// (0,1] (a non-opportunistic cycle is at least 1s) and the exploration term
// is scaled by the parent's running mean so both terms share an order of
// magnitude.
double uct_score(double child_mean, int child_visits, double parent_mean, int parent_visits,
                 double exploration);

// Best-first search over storage decisions on a frozen snapshot. Horizons
// are truncated at `horizon` actions from the root; rollouts follow the
// shortest-leg policy; returns are undiscounted sums of cycle times from the
// root's first action to the rollout end. Every expansion immediately
// simulates the new children (each simulation counts against the trajectory
// budget), so selection always sees visited children. The final choice is
// the root child with the best (lowest) return seen, ties to the lowest
// location id.
class MctsTree {
public:
    struct Node {
        std::int16_t action = -1;
        int parent = -1;
        int depth = 0;
        std::int64_t path_cost = 0;
        bool terminal = false;
        bool expanded = false;
        int visits = 0;
        double mean_return = 0.0;
        double best_return = 0.0;
        std::vector<int> children;
        std::vector<double> preds;  // cached masked predictions (supervised mode)
        SimState state;             // at this node's decision point

        // Running-average / best-value update used by backpropagation.
        static void bump(Node& n, double ret) {
            ++n.visits;
            if (n.visits == 1) {
                n.mean_return = ret;
                n.best_return = ret;
            } else {
                n.mean_return += (ret - n.mean_return) / n.visits;
                if (ret < n.best_return) n.best_return = ret;
            }
        }
    };

    MctsTree(const SimState& at_decision, MctsParams params);

    // Runs the full selection/expansion/simulation/backpropagation loop and
    // returns the chosen location. A predictor switches in-tree selection
    // from the bandit rule to visit-weighted sampling of its probabilities.
    int run();
    int run_supervised(const ActionPredictor& predictor, Rng& rng);

    int select_uct(int parent) const;
    int select_supervised(int parent, const ActionPredictor& predictor, Rng& rng);
    // Creates one child per feasible action; simulates and backpropagates
    // each until the budget runs out (leftovers stay unvisited).
    void expand_all(int leaf, int& budget);
    std::int64_t simulate(int node_index);
    void backpropagate(int node_index, double ret);
    int best_root_action() const;

    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    int root() const { return 0; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    int loop(const ActionPredictor* predictor, Rng* rng);

    MctsParams params_;
    std::vector<Node> nodes_;
    ShortestLegPolicy rollout_policy_;
    std::optional<SimState> scratch_;
};

int mcts_decide(const SimState& at_decision, const MctsParams& params);
int supervised_mcts_decide(const SimState& at_decision, const MctsParams& params,
                           const ActionPredictor& predictor, Rng& rng);

// Bench-facing wrappers.
class MctsPolicy final : public StoragePolicy {
public:
    explicit MctsPolicy(MctsParams params) : params_(params) {}
    int decide(const SimState& state, const DecisionPoint&) override {
        return mcts_decide(state, params_);
    }
    std::string name() const override;
    bool deterministic() const override { return true; }

private:
    MctsParams params_;
};

class SupervisedMctsPolicy final : public StoragePolicy {
public:
    SupervisedMctsPolicy(MctsParams params, ActionPredictor predictor, std::uint64_t seed)
        : params_(params), predictor_(std::move(predictor)), rng_(seed) {}
    int decide(const SimState& state, const DecisionPoint&) override {
        return supervised_mcts_decide(state, params_, predictor_, rng_);
    }
    std::string name() const override;
    bool deterministic() const override { return false; }

private:
    MctsParams params_;
    ActionPredictor predictor_;
    Rng rng_;
};

}  // namespace rmfs
