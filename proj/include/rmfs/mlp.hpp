#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmfs/features.hpp"
#include "rmfs/policies.hpp"
#include "rmfs/predictor.hpp"
#include "rmfs/sim.hpp"

namespace rmfs {

// Dense feed-forward classifier over storage locations: rectifier hidden
// layers, softmax output. Double precision throughout; weights row-major
// [fan_in x fan_out] so the inner inference loop runs over contiguous rows.
struct MlpModel {
    std::vector<int> layer_dims;               // [n_in, hidden..., locations]
    std::vector<std::vector<double>> weights;  // per layer, fan_in*fan_out
    std::vector<std::vector<double>> biases;   // per layer, fan_out

    // Instance stamp; checked when the model drives a policy.
    std::int32_t r = 0;
    std::int32_t h = 0;
    std::int32_t locations = 0;
    std::uint64_t layout_fingerprint = 0;

    int input_width() const { return layer_dims.front(); }
    int output_width() const { return layer_dims.back(); }
};

struct TrainConfig {
    int epochs = 40;
    int batch_size = 1024;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    bool shuffle = true;
    bool verbose = false;
};

// He-scaled normal weights (stddev sqrt(2/fan_in)), zero biases.
MlpModel init_model(const std::vector<int>& layer_dims, std::uint64_t seed);

// Class probabilities for one input; outputs sum to 1.
std::vector<double> forward(const MlpModel& model, std::span<const double> input);
std::vector<double> forward(const MlpModel& model, std::span<const float> input);

// Mini-batch Adam on categorical cross-entropy. Returns per-epoch mean loss.
// Aborts with a diagnostic if the loss turns non-finite.
std::vector<double> train(MlpModel& model, const Dataset& data, const TrainConfig& cfg);

// Fraction of records whose argmax matches the stored label.
double accuracy(const MlpModel& model, const Dataset& data);

// Mean cross-entropy and gradient of every parameter for one batch, in the
// order (W0, b0, W1, b1, ...). Exposed for gradient checking.
double loss_and_gradients(const MlpModel& model, std::span<const ExperienceRecord> batch,
                          std::vector<std::vector<double>>& weight_grads,
                          std::vector<std::vector<double>>& bias_grads);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

// Highest-probability free location under the classifier.
int lp_decide(const MlpModel& model, const SimState& state);

class LearnedPolicy final : public StoragePolicy {
public:
    explicit LearnedPolicy(const MlpModel* model) : model_(model) {}
    int decide(const SimState& state, const DecisionPoint&) override {
        return lp_decide(*model_, state);
    }
    std::string name() const override { return "lp"; }
    bool deterministic() const override { return true; }

private:
    const MlpModel* model_;
};

// Masked, renormalized class probabilities over the given actions; uniform
// when the classifier assigns the whole mask zero probability.
ActionPredictor make_mlp_predictor(const MlpModel* model);

}  // namespace rmfs
