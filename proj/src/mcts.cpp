#include "rmfs/mcts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmfs {

double uct_score(double child_mean, int child_visits, double parent_mean, int parent_visits,
                 double exploration) {
    return 1.0 / child_mean +
           (exploration / parent_mean) *
               std::sqrt(std::log(static_cast<double>(parent_visits)) / child_visits);
}

MctsTree::MctsTree(const SimState& at_decision, MctsParams params) : params_(params) {
    if (params.horizon < 1) throw std::invalid_argument("mcts: horizon must be >= 1");
    if (params.trajectories < 1) throw std::invalid_argument("mcts: trajectories must be >= 1");
    if (at_decision.decision_robot() < 0) {
        throw std::invalid_argument("mcts: state is not at a decision point");
    }
    Node root;
    root.state = at_decision.snapshot();
    nodes_.push_back(std::move(root));
}

int MctsTree::select_uct(int parent) const {
    const Node& p = nodes_[static_cast<std::size_t>(parent)];
    if (p.children.empty()) throw std::logic_error("mcts: selecting from a childless node");
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const int ci : p.children) {  // ascending action order: ties keep lowest id
        const Node& c = nodes_[static_cast<std::size_t>(ci)];
        if (c.visits == 0) throw std::logic_error("mcts: unvisited child during selection");
        const double s =
            uct_score(c.mean_return, c.visits, p.mean_return, p.visits, params_.exploration);
        if (s > best_score) {
            best_score = s;
            best = ci;
        }
    }
    return best;
}

int MctsTree::select_supervised(int parent, const ActionPredictor& predictor, Rng& rng) {
    Node& p = nodes_[static_cast<std::size_t>(parent)];
    if (p.children.empty()) throw std::logic_error("mcts: selecting from a childless node");
    if (p.preds.empty()) {
        std::vector<std::int16_t> actions;
        actions.reserve(p.children.size());
        for (const int ci : p.children) {
            actions.push_back(nodes_[static_cast<std::size_t>(ci)].action);
        }
        p.preds.assign(actions.size(), 0.0);
        predictor(p.state, actions, p.preds);
    }
    std::vector<double> weights(p.children.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.children.size(); ++i) {
        const Node& c = nodes_[static_cast<std::size_t>(p.children[i])];
        weights[i] = p.preds[i] / (c.visits + 1);
        total += weights[i];
    }
    if (total <= 0.0) {  // degenerate predictions: sample uniformly
        return p.children[static_cast<std::size_t>(rng.below(p.children.size()))];
    }
    double draw = rng.uniform01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        draw -= weights[i];
        if (draw <= 0.0) return p.children[i];
    }
    return p.children.back();
}

void MctsTree::expand_all(int leaf, int& budget) {
    {
        Node& l = nodes_[static_cast<std::size_t>(leaf)];
        if (l.expanded || l.terminal) throw std::logic_error("mcts: node cannot be expanded");
        l.expanded = true;
    }
    // Copy what we need before push_back invalidates references.
    const int leaf_depth = nodes_[static_cast<std::size_t>(leaf)].depth;
    const std::int64_t leaf_cost = nodes_[static_cast<std::size_t>(leaf)].path_cost;
    const std::vector<std::int16_t> actions(
        nodes_[static_cast<std::size_t>(leaf)].state.free_locations().begin(),
        nodes_[static_cast<std::size_t>(leaf)].state.free_locations().end());

    for (const std::int16_t action : actions) {
        Node child;
        child.action = action;
        child.parent = leaf;
        child.depth = leaf_depth + 1;
        child.state = nodes_[static_cast<std::size_t>(leaf)].state;  // frozen copy
        const CycleOutcome out = child.state.apply_action(action);
        child.path_cost = leaf_cost + out.cycle_time;
        const bool has_decision = child.state.advance().has_value();
        child.terminal = !has_decision || child.depth >= params_.horizon;
        const int child_index = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(child));
        nodes_[static_cast<std::size_t>(leaf)].children.push_back(child_index);
        if (budget > 0) {
            const std::int64_t ret = simulate(child_index);
            backpropagate(child_index, static_cast<double>(ret));
            --budget;
        }
    }
}

std::int64_t MctsTree::simulate(int node_index) {
    const Node& n = nodes_[static_cast<std::size_t>(node_index)];
    if (n.terminal) return n.path_cost;
    scratch_ = n.state;  // copy-assign reuses buffers across calls
    SimState& sim = *scratch_;
    std::int64_t cost = n.path_cost;
    for (int depth = n.depth; depth < params_.horizon;) {
        const int action = rollout_policy_.decide(sim, DecisionPoint{sim.decision_robot()});
        cost += sim.apply_action(action).cycle_time;
        ++depth;
        if (!sim.advance()) break;
    }
    return cost;
}

void MctsTree::backpropagate(int node_index, double ret) {
    for (int i = node_index; i >= 0; i = nodes_[static_cast<std::size_t>(i)].parent) {
        Node::bump(nodes_[static_cast<std::size_t>(i)], ret);
    }
}

int MctsTree::best_root_action() const {
    const Node& root_node = nodes_[0];
    int best = -1;
    double best_ret = std::numeric_limits<double>::infinity();
    for (const int ci : root_node.children) {
        const Node& c = nodes_[static_cast<std::size_t>(ci)];
        if (c.visits == 0) continue;
        if (c.best_return < best_ret) {
            best_ret = c.best_return;
            best = c.action;
        }
    }
    if (best < 0) throw std::logic_error("mcts: no root child was visited");
    return best;
}

int MctsTree::loop(const ActionPredictor* predictor, Rng* rng) {
    const auto free = nodes_[0].state.free_locations();
    if (free.size() == 1) return free[0];

    int budget = params_.trajectories;
    expand_all(root(), budget);
    while (budget > 0) {
        int current = root();
        while (nodes_[static_cast<std::size_t>(current)].expanded &&
               !nodes_[static_cast<std::size_t>(current)].terminal) {
            current = predictor ? select_supervised(current, *predictor, *rng)
                                : select_uct(current);
        }
        if (nodes_[static_cast<std::size_t>(current)].terminal) {
            backpropagate(current,
                          static_cast<double>(nodes_[static_cast<std::size_t>(current)].path_cost));
            --budget;
        } else {
            expand_all(current, budget);
        }
    }
    return best_root_action();
}

int MctsTree::run() { return loop(nullptr, nullptr); }

int MctsTree::run_supervised(const ActionPredictor& predictor, Rng& rng) {
    return loop(&predictor, &rng);
}

int mcts_decide(const SimState& at_decision, const MctsParams& params) {
    MctsTree tree(at_decision, params);
    return tree.run();
}

int supervised_mcts_decide(const SimState& at_decision, const MctsParams& params,
                           const ActionPredictor& predictor, Rng& rng) {
    MctsTree tree(at_decision, params);
    return tree.run_supervised(predictor, rng);
}

std::string MctsPolicy::name() const {
    return "mcts:h=" + std::to_string(params_.horizon) +
           ",traj=" + std::to_string(params_.trajectories);
}

std::string SupervisedMctsPolicy::name() const {
    return "smcts:h=" + std::to_string(params_.horizon) +
           ",traj=" + std::to_string(params_.trajectories);
}

}  // namespace rmfs
