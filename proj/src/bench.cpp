#include "rmfs/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "rmfs/mcts.hpp"
#include "rmfs/rng.hpp"
#include "rmfs/sts.hpp"

namespace rmfs {

namespace {

const std::vector<std::string> kFamilies = {"random", "col",        "class", "sl", "sl+rollout",
                                            "lp",     "lp+rollout", "mcts",  "smcts", "sts"};

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

int PolicySpec::family_rank() const {
    const auto it = std::find(kFamilies.begin(), kFamilies.end(), family);
    return static_cast<int>(it - kFamilies.begin());
}

std::string PolicySpec::display_name() const {
    std::string out = family;
    if (family == "sl+rollout" || family == "lp+rollout") {
        out += ":h=" + std::to_string(h);
    } else if (family == "mcts" || family == "smcts" || family == "sts") {
        out += ":h=" + std::to_string(h) + ",traj=" + std::to_string(traj);
    }
    return out;
}

PolicySpec parse_policy_spec(const std::string& text) {
    PolicySpec spec;
    const auto colon = text.find(':');
    spec.family = text.substr(0, colon);
    if (std::find(kFamilies.begin(), kFamilies.end(), spec.family) == kFamilies.end()) {
        throw std::invalid_argument("unknown policy: " + text);
    }
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("bad policy option: " + kv);
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "h") {
                spec.h = std::stoi(val);
            } else if (key == "traj") {
                spec.traj = std::stoi(val);
            } else if (key == "c") {
                spec.c = parse_double(val);
            } else if (key == "eta") {
                spec.eta = parse_double(val);
            } else if (key == "gamma") {
                spec.gamma = parse_double(val);
            } else if (key == "model") {
                spec.model = val;
            } else {
                throw std::invalid_argument("unknown policy option: " + key);
            }
        }
    }
    const bool needs_h = spec.family == "sl+rollout" || spec.family == "lp+rollout" ||
                         spec.family == "mcts" || spec.family == "smcts" ||
                         spec.family == "sts";
    if (needs_h && spec.h < 1) {
        throw std::invalid_argument("policy needs h=<n>: " + text);
    }
    const bool needs_traj =
        spec.family == "mcts" || spec.family == "smcts" || spec.family == "sts";
    if (needs_traj && spec.traj < 1) {
        throw std::invalid_argument("policy needs traj=<n>: " + text);
    }
    return spec;
}

const MlpModel* ModelCache::get(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("policy requires a model file");
    auto it = models_.find(path);
    if (it == models_.end()) {
        it = models_.emplace(path, std::make_unique<MlpModel>(load_model(path))).first;
    }
    return it->second.get();
}

std::unique_ptr<StoragePolicy> make_policy(const PolicySpec& spec, ModelCache& cache,
                                           const std::string& default_model,
                                           std::uint64_t seed) {
    const std::string model_path = spec.model.empty() ? default_model : spec.model;
    if (spec.family == "random") return std::make_unique<RandomPolicy>(seed);
    if (spec.family == "col") return std::make_unique<ColPolicy>();
    if (spec.family == "class") return std::make_unique<ClassBasedPolicy>();
    if (spec.family == "sl") return std::make_unique<ShortestLegPolicy>();
    if (spec.family == "sl+rollout") {
        return std::make_unique<RolloutPolicy>(std::make_unique<ShortestLegPolicy>(), spec.h);
    }
    if (spec.family == "lp") return std::make_unique<LearnedPolicy>(cache.get(model_path));
    if (spec.family == "lp+rollout") {
        return std::make_unique<RolloutPolicy>(
            std::make_unique<LearnedPolicy>(cache.get(model_path)), spec.h);
    }
    if (spec.family == "mcts") {
        return std::make_unique<MctsPolicy>(MctsParams{spec.h, spec.traj, spec.c});
    }
    if (spec.family == "smcts") {
        return std::make_unique<SupervisedMctsPolicy>(MctsParams{spec.h, spec.traj, spec.c},
                                                      make_mlp_predictor(cache.get(model_path)),
                                                      seed);
    }
    if (spec.family == "sts") {
        return std::make_unique<StsPolicy>(StsParams{spec.h, spec.traj, spec.eta, spec.gamma},
                                           make_mlp_predictor(cache.get(model_path)));
    }
    throw std::invalid_argument("unknown policy family: " + spec.family);
}

namespace {

struct InstanceResult {
    double avg_cycle = 0.0;
    double op_tasks = 0.0;
    double time_per_action = 0.0;
};

InstanceResult run_instance(const ExperimentConfig& cfg, const PolicySpec& spec,
                            ModelCache& cache, int instance_index, int policy_index) {
    SimConfig sim_cfg = cfg.sim;
    sim_cfg.seed = mix_seed(cfg.sim.seed, static_cast<std::uint64_t>(instance_index));
    sim_cfg.action_budget = cfg.actions;

    const std::uint64_t policy_seed =
        mix_seed(mix_seed(cfg.sim.seed, 0xb5297a4d ^ static_cast<std::uint64_t>(policy_index)),
                 static_cast<std::uint64_t>(instance_index));
    const auto policy = make_policy(spec, cache, cfg.model_path, policy_seed);

    SimState sim = SimState::create(sim_cfg);
    const auto t0 = std::chrono::steady_clock::now();
    while (const auto dp = sim.advance()) {
        sim.apply_action(policy->decide(sim, *dp));
    }
    const auto t1 = std::chrono::steady_clock::now();

    InstanceResult r;
    r.avg_cycle = static_cast<double>(sim.stats().cycle_seconds) /
                  static_cast<double>(sim.stats().actions);
    r.op_tasks = static_cast<double>(sim.stats().opportunistic_tasks);
    r.time_per_action = std::chrono::duration<double>(t1 - t0).count() /
                        static_cast<double>(sim.stats().actions);
    return r;
}

}  // namespace

std::vector<PolicyMetrics> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.instances < 1 || cfg.actions < 1) {
        throw std::invalid_argument("experiment: need at least one instance and one action");
    }
    std::vector<PolicySpec> specs;
    specs.reserve(cfg.policy_specs.size() + 1);
    bool has_random = false;
    for (const auto& text : cfg.policy_specs) {
        specs.push_back(parse_policy_spec(text));
        has_random = has_random || specs.back().family == "random";
    }
    if (!has_random) specs.insert(specs.begin(), parse_policy_spec("random"));

    // Validate model references up front.
    {
        ModelCache probe;
        for (const auto& spec : specs) {
            const bool needs_model = spec.family == "lp" || spec.family == "lp+rollout" ||
                                     spec.family == "smcts" || spec.family == "sts";
            if (needs_model) probe.get(spec.model.empty() ? cfg.model_path : spec.model);
        }
    }

    const std::size_t n_tasks = specs.size() * static_cast<std::size_t>(cfg.instances);
    std::vector<InstanceResult> results(n_tasks);
    std::atomic<std::size_t> next_task{0};
    const int workers = std::max(1, cfg.threads);
    const auto worker = [&] {
        ModelCache cache;  // per-worker cache; model files are read-only
        for (;;) {
            const std::size_t task = next_task.fetch_add(1);
            if (task >= n_tasks) return;
            const std::size_t pi = task / static_cast<std::size_t>(cfg.instances);
            const std::size_t ii = task % static_cast<std::size_t>(cfg.instances);
            results[task] = run_instance(cfg, specs[pi], cache, static_cast<int>(ii),
                                         static_cast<int>(pi));
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<PolicyMetrics> metrics(specs.size());
    double random_avg = 0.0;
    for (std::size_t pi = 0; pi < specs.size(); ++pi) {
        double sum = 0.0, sum2 = 0.0, ops = 0.0, tpa = 0.0;
        for (int ii = 0; ii < cfg.instances; ++ii) {
            const InstanceResult& r =
                results[pi * static_cast<std::size_t>(cfg.instances) + static_cast<std::size_t>(ii)];
            sum += r.avg_cycle;
            sum2 += r.avg_cycle * r.avg_cycle;
            ops += r.op_tasks;
            tpa += r.time_per_action;
        }
        const double n = static_cast<double>(cfg.instances);
        PolicyMetrics& m = metrics[pi];
        m.policy = specs[pi].display_name();
        m.h = specs[pi].h;
        m.traj = specs[pi].traj;
        m.avg_cycle_time = sum / n;
        m.std_dev = cfg.instances > 1
                        ? std::sqrt(std::max(0.0, (sum2 - n * m.avg_cycle_time * m.avg_cycle_time) /
                                                      (n - 1.0)))
                        : 0.0;
        m.op_tasks = ops / n;
        m.time_per_action = tpa / n;
        if (specs[pi].family == "random") random_avg = m.avg_cycle_time;
    }
    for (auto& m : metrics) {
        m.gain_vs_random = 100.0 * (random_avg - m.avg_cycle_time) / random_avg;
    }

    std::vector<std::size_t> order(specs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int ra = specs[a].family_rank();
        const int rb = specs[b].family_rank();
        if (ra != rb) return ra < rb;
        if (specs[a].h != specs[b].h) return specs[a].h < specs[b].h;
        return specs[a].traj < specs[b].traj;
    });
    std::vector<PolicyMetrics> sorted;
    sorted.reserve(metrics.size());
    for (const std::size_t i : order) sorted.push_back(std::move(metrics[i]));
    return sorted;
}

std::string compare_table(const std::vector<PolicyMetrics>& results) {
    if (results.empty()) throw std::invalid_argument("compare_table: no results");
    std::string out =
        "policy,h,traj,avg_cycle_time_s,std_dev_s,gain_vs_random_pct,op_tasks,time_s_per_action\n";
    for (const auto& m : results) {
        out += m.policy;
        out += ',';
        out += m.h >= 0 ? std::to_string(m.h) : "-";
        out += ',';
        out += m.traj >= 0 ? std::to_string(m.traj) : "-";
        out += ',';
        out += format_double(m.avg_cycle_time);
        out += ',';
        out += format_double(m.std_dev);
        out += ',';
        out += format_double(m.gain_vs_random);
        out += ',';
        out += format_double(m.op_tasks);
        out += ',';
        out += format_double(m.time_per_action);
        out += '\n';
    }
    return out;
}

std::vector<PolicyMetrics> parse_metrics_csv(const std::string& csv) {
    std::stringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line)) throw std::invalid_argument("metrics csv: empty document");
    std::vector<PolicyMetrics> out;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw std::invalid_argument("metrics csv: bad row: " + line);
        PolicyMetrics m;
        m.policy = fields[0];
        m.h = fields[1] == "-" ? -1 : std::stoi(fields[1]);
        m.traj = fields[2] == "-" ? -1 : std::stoi(fields[2]);
        m.avg_cycle_time = parse_double(fields[3]);
        m.std_dev = parse_double(fields[4]);
        m.gain_vs_random = parse_double(fields[5]);
        m.op_tasks = parse_double(fields[6]);
        m.time_per_action = parse_double(fields[7]);
        out.push_back(std::move(m));
    }
    return out;
}

std::string accuracy_vs_performance(const std::vector<std::string>& model_paths,
                                    const Dataset& test_data, const ExperimentConfig& cfg,
                                    int rollout_h, int sts_traj) {
    if (model_paths.empty()) throw std::invalid_argument("acc-perf: no models given");
    std::string out = "model,test_accuracy,lp_gain_pct,lp_rollout_gain_pct,sts_gain_pct\n";
    for (const auto& path : model_paths) {
        const MlpModel model = load_model(path);
        if (static_cast<int>(test_data.feature_width()) != model.input_width()) {
            throw std::invalid_argument("acc-perf: model " + path +
                                        " does not match the test dataset");
        }
        const double acc = accuracy(model, test_data);

        ExperimentConfig run_cfg = cfg;
        run_cfg.model_path = path;
        run_cfg.policy_specs = {"random", "lp", "lp+rollout:h=" + std::to_string(rollout_h),
                                "sts:h=" + std::to_string(rollout_h) +
                                    ",traj=" + std::to_string(sts_traj)};
        const auto metrics = run_experiment(run_cfg);
        double lp = 0.0, lpr = 0.0, sts = 0.0;
        for (const auto& m : metrics) {
            if (m.policy == "lp") lp = m.gain_vs_random;
            if (m.policy.starts_with("lp+rollout")) lpr = m.gain_vs_random;
            if (m.policy.starts_with("sts")) sts = m.gain_vs_random;
        }
        out += path + ',' + format_double(acc) + ',' + format_double(lp) + ',' +
               format_double(lpr) + ',' + format_double(sts) + '\n';
    }
    return out;
}

SimConfig sim_config_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SimConfig cfg;
    if (j.contains("columns")) cfg.layout.columns = j.at("columns").get<int>();
    if (j.contains("rows")) cfg.layout.rows = j.at("rows").get<int>();
    if (j.contains("station")) {
        const auto s = j.at("station");
        cfg.layout.station = Coord{s.at(0).get<int>(), s.at(1).get<int>()};
    }
    if (j.contains("robots")) cfg.robots = j.at("robots").get<int>();
    if (j.contains("backlog")) cfg.backlog = j.at("backlog").get<int>();
    if (j.contains("lambda")) cfg.poisson_rate = j.at("lambda").get<double>();
    if (j.contains("skew")) cfg.order_skew = j.at("skew").get<double>();
    if (j.contains("picking_time")) cfg.picking_time = j.at("picking_time").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("action_budget")) cfg.action_budget = j.at("action_budget").get<std::int64_t>();
    return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
    nlohmann::json j;
    j["columns"] = cfg.layout.columns;
    j["rows"] = cfg.layout.rows;
    if (cfg.layout.station) j["station"] = {cfg.layout.station->x, cfg.layout.station->y};
    j["robots"] = cfg.robots;
    j["backlog"] = cfg.backlog;
    j["lambda"] = cfg.poisson_rate;
    j["skew"] = cfg.order_skew;
    j["picking_time"] = cfg.picking_time;
    j["seed"] = cfg.seed;
    j["action_budget"] = cfg.action_budget;
    return j.dump(2);
}

}  // namespace rmfs
