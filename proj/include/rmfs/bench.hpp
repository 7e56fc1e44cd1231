#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rmfs/mlp.hpp"
#include "rmfs/policies.hpp"
#include "rmfs/sim.hpp"

namespace rmfs {

struct ExperimentConfig {
    SimConfig sim{};                        // template; per-instance seeds derive from sim.seed
    std::vector<std::string> policy_specs;  // see parse_policy_spec
    int instances = 20;
    std::int64_t actions = 2000;
    std::string model_path;  // default model for lp / lp+rollout / smcts / sts
    int threads = 1;
};

struct PolicyMetrics {
    std::string policy;
    int h = -1;     // -1 when not applicable
    int traj = -1;  // -1 when not applicable
    double avg_cycle_time = 0.0;
    double std_dev = 0.0;           // across instance means
    double gain_vs_random = 0.0;    // percent, against the batch's random run
    double op_tasks = 0.0;          // mean per instance
    double time_per_action = 0.0;   // wall-clock seconds, informational only

    bool operator==(const PolicyMetrics&) const = default;
};

// Parsed form of a policy spec string such as "mcts:h=30,traj=200,c=0.0625".
struct PolicySpec {
    std::string family;  // random|col|class|sl|sl+rollout|lp|lp+rollout|mcts|smcts|sts
    int h = -1;
    int traj = -1;
    double c = 1.0 / 16.0;
    double eta = 0.1;
    double gamma = 1.0;
    std::string model;  // optional per-policy override

    int family_rank() const;
    std::string display_name() const;
};

PolicySpec parse_policy_spec(const std::string& spec);

// Holds loaded models so repeated specs share parameters.
class ModelCache {
public:
    const MlpModel* get(const std::string& path);

private:
    std::map<std::string, std::unique_ptr<MlpModel>> models_;
};

// Instantiates a policy (fresh per instance; tree searches and samplers are
// not shareable across runs). `seed` drives any internal randomness.
std::unique_ptr<StoragePolicy> make_policy(const PolicySpec& spec, ModelCache& cache,
                                           const std::string& default_model,
                                           std::uint64_t seed);

// Evaluates each policy over the configured instances under common random
// numbers: instance i uses the same simulator seed for every policy, so all
// policies face identical order streams. A "random" row is added when absent
// since gains are measured against it. Metrics aggregate per instance index,
// independent of worker scheduling.
std::vector<PolicyMetrics> run_experiment(const ExperimentConfig& cfg);

// Appendix-style comparison table. Numbers print in shortest exact form so
// the CSV parses back to identical metrics.
std::string compare_table(const std::vector<PolicyMetrics>& results);
std::vector<PolicyMetrics> parse_metrics_csv(const std::string& csv);

// One row per model: held-out accuracy plus the gains of the policies the
// model powers (plain argmax, with rollouts, and tree search).
std::string accuracy_vs_performance(const std::vector<std::string>& model_paths,
                                    const Dataset& test_data, const ExperimentConfig& cfg,
                                    int rollout_h, int sts_traj);

// JSON (de)serialization of instance/experiment configs for the CLI.
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& cfg);

}  // namespace rmfs
