#include "rmfs/sts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmfs {

std::vector<double> transform_preds(std::span<const double> preds, double eta) {
    if (!(eta >= 0.0) || eta > 1.0) {
        throw std::invalid_argument("sts: eta must be in [0, 1]");
    }
    std::vector<double> out(preds.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out[i] = preds[i] + (0.5 - preds[i]) * eta;
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct HeapCmp {
    // std:: heap functions keep the *largest* element first, so invert.
    template <typename K>
    bool operator()(const K& a, const K& b) const {
        return b < a;
    }
};
}  // namespace

StsSearch::StsSearch(const SimState& at_decision, StsParams params,
                     const ActionPredictor& predictor)
    : params_(params), predictor_(predictor) {
    if (params.h_max < 1) throw std::invalid_argument("sts: h_max must be >= 1");
    if (params.trajectories < 1) throw std::invalid_argument("sts: trajectories must be >= 1");
    if (!(params.eta >= 0.0) || params.eta > 1.0) {
        throw std::invalid_argument("sts: eta must be in [0, 1]");
    }
    if (!(params.gamma >= 0.0) || params.gamma > 1.0) {
        throw std::invalid_argument("sts: gamma must be in [0, 1]");
    }
    if (at_decision.decision_robot() < 0) {
        throw std::invalid_argument("sts: state is not at a decision point");
    }
    Node root;
    root.prob = 1.0;
    root.reward = 0.0;
    root.value = kInf;
    root.activated = true;
    root.state = at_decision.snapshot();
    nodes_.push_back(std::move(root));
    open_.push_back(OpenKey{-1.0, 0, -1, 0});
}

void StsSearch::activate(int index) {
    Node& n = nodes_[static_cast<std::size_t>(index)];
    if (n.activated) return;
    const Node& parent = nodes_[static_cast<std::size_t>(n.parent)];
    n.state = *parent.state;  // frozen copy; replay the action lazily
    const CycleOutcome out = n.state->apply_action(n.action);
    n.reward = static_cast<double>(out.cycle_time);
    n.terminal = !n.state->advance().has_value();
    n.activated = true;
}

void StsSearch::descend(int start) {
    int current = start;
    for (;;) {
        {
            Node& n = nodes_[static_cast<std::size_t>(current)];
            if (n.depth >= params_.h_max || n.terminal) {
                // Trajectory endpoint: its best return is its own reward.
                if (n.value > n.reward) n.value = n.reward;
                terminal_mass_ += n.prob;
                backprop(current, n.reward);
                return;
            }
        }

        const std::vector<std::int16_t> actions(
            nodes_[static_cast<std::size_t>(current)].state->free_locations().begin(),
            nodes_[static_cast<std::size_t>(current)].state->free_locations().end());
        std::vector<double> preds(actions.size());
        predictor_(*nodes_[static_cast<std::size_t>(current)].state, actions, preds);
        const std::vector<double> pp = transform_preds(preds, params_.eta);

        const int current_depth = nodes_[static_cast<std::size_t>(current)].depth;
        const double current_prob = nodes_[static_cast<std::size_t>(current)].prob;

        int greedy_slot = 0;
        for (std::size_t i = 1; i < pp.size(); ++i) {
            if (pp[i] > pp[greedy_slot]) greedy_slot = static_cast<int>(i);
        }

        int greedy_index = -1;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            Node child;
            child.action = actions[i];
            child.parent = current;
            child.depth = current_depth + 1;
            child.pred_prime = pp[i];
            child.prob = pp[i] * current_prob;
            child.value = kInf;
            const int child_index = static_cast<int>(nodes_.size());
            nodes_.push_back(std::move(child));
            nodes_[static_cast<std::size_t>(current)].children.push_back(child_index);
            if (static_cast<int>(i) == greedy_slot) {
                greedy_index = child_index;
            } else {
                open_.push_back(OpenKey{-nodes_[static_cast<std::size_t>(child_index)].prob,
                                        current_depth + 1, actions[i], child_index});
                std::push_heap(open_.begin(), open_.end(), HeapCmp{});
            }
        }

        activate(greedy_index);
        current = greedy_index;
    }
}

void StsSearch::backprop(int index, double ret) {
    int child = index;
    double r = ret;
    for (;;) {
        const int parent = nodes_[static_cast<std::size_t>(child)].parent;
        if (parent < 0) return;
        Node& p = nodes_[static_cast<std::size_t>(parent)];
        const double candidate = p.reward + params_.gamma * r;
        if (p.value <= candidate) return;  // no improvement: ancestors cannot improve either
        p.value = candidate;
        r = candidate;
        child = parent;
    }
}

int StsSearch::run(StsTrace* trace) {
    const auto root_free = nodes_[0].state->free_locations();
    if (root_free.size() == 1) return root_free[0];

    int trajectories = 0;
    while (trajectories < params_.trajectories && !open_.empty()) {
        std::pop_heap(open_.begin(), open_.end(), HeapCmp{});
        const OpenKey key = open_.back();
        open_.pop_back();

        if (trace) {
            trace->pops.push_back(StsPop{-key.neg_prob,
                                         nodes_[static_cast<std::size_t>(key.index)].depth,
                                         nodes_[static_cast<std::size_t>(key.index)].action});
        }
        activate(key.index);
        descend(key.index);
        ++trajectories;

        if (trace) {
            double open_mass = 0.0;
            for (const OpenKey& k : open_) open_mass += -k.neg_prob;
            trace->open_mass.push_back(open_mass);
            trace->terminal_mass.push_back(terminal_mass_);
        }
    }
    if (trace) trace->trajectories = trajectories;

    int best_action = -1;
    double best_value = kInf;
    for (const int ci : nodes_[0].children) {
        const Node& c = nodes_[static_cast<std::size_t>(ci)];
        if (c.value < best_value) {
            best_value = c.value;
            best_action = c.action;
        }
    }
    if (best_action < 0) {
        // No trajectory completed through any root child; fall back to the
        // lowest feasible action id.
        best_action = root_free[0];
    }
    return best_action;
}

int sts_decide(const SimState& at_decision, const StsParams& params,
               const ActionPredictor& predictor, StsTrace* trace) {
    StsSearch search(at_decision, params, predictor);
    return search.run(trace);
}

std::string StsPolicy::name() const {
    return "sts:h=" + std::to_string(params_.h_max) +
           ",traj=" + std::to_string(params_.trajectories);
}

}  // namespace rmfs
