#include "rmfs/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rmfs/rng.hpp"

namespace rmfs {

namespace {

// C[rows x n] = A[rows x m] * W[m x n] + bias (bias may be null).
void matmul_bias(const double* a, const double* w, const double* bias, double* c,
                 std::size_t rows, std::size_t m, std::size_t n) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* crow = c + r * n;
        if (bias) {
            std::memcpy(crow, bias, n * sizeof(double));
        } else {
            std::memset(crow, 0, n * sizeof(double));
        }
        const double* arow = a + r * m;
        for (std::size_t k = 0; k < m; ++k) {
            const double av = arow[k];
            const double* wrow = w + k * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * wrow[j];
        }
    }
}

void softmax_rows(double* z, std::size_t rows, std::size_t n) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = z + r * n;
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const double inv = 1.0 / sum;
        for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
    }
}

// Activations and deltas for one batch; buffers are reused across batches.
struct BatchWork {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> act;   // input + post-activation per layer
    std::vector<std::vector<double>> delta; // dLoss/dPre per layer

    void size_for(const MlpModel& model, std::size_t batch) {
        const std::size_t layers = model.weights.size();
        pre.resize(layers);
        delta.resize(layers);
        act.resize(layers + 1);
        act[0].resize(batch * static_cast<std::size_t>(model.layer_dims[0]));
        for (std::size_t l = 0; l < layers; ++l) {
            const auto width = static_cast<std::size_t>(model.layer_dims[l + 1]);
            pre[l].resize(batch * width);
            delta[l].resize(batch * width);
            act[l + 1].resize(batch * width);
        }
    }
};

// Forward + backward over one batch; adds gradients into the given arrays
// (callers zero them first) and returns the mean cross-entropy.
double batch_pass(const MlpModel& model, std::span<const ExperienceRecord> batch,
                  BatchWork& work, std::vector<std::vector<double>>& wgrads,
                  std::vector<std::vector<double>>& bgrads) {
    const std::size_t layers = model.weights.size();
    const std::size_t bsz = batch.size();
    const auto in_width = static_cast<std::size_t>(model.layer_dims[0]);
    work.size_for(model, bsz);

    for (std::size_t i = 0; i < bsz; ++i) {
        if (batch[i].features.size() != in_width) {
            throw std::invalid_argument("mlp: record width does not match the input layer");
        }
        for (std::size_t j = 0; j < in_width; ++j) {
            work.act[0][i * in_width + j] = static_cast<double>(batch[i].features[j]);
        }
    }

    for (std::size_t l = 0; l < layers; ++l) {
        const auto m = static_cast<std::size_t>(model.layer_dims[l]);
        const auto n = static_cast<std::size_t>(model.layer_dims[l + 1]);
        matmul_bias(work.act[l].data(), model.weights[l].data(), model.biases[l].data(),
                    work.pre[l].data(), bsz, m, n);
        if (l + 1 < layers) {
            for (std::size_t k = 0; k < bsz * n; ++k) {
                work.act[l + 1][k] = work.pre[l][k] > 0.0 ? work.pre[l][k] : 0.0;
            }
        } else {
            std::memcpy(work.act[l + 1].data(), work.pre[l].data(),
                        bsz * n * sizeof(double));
            softmax_rows(work.act[l + 1].data(), bsz, n);
        }
    }

    const auto classes = static_cast<std::size_t>(model.layer_dims[layers]);
    double loss = 0.0;
    {
        const double* probs = work.act[layers].data();
        double* dz = work.delta[layers - 1].data();
        std::memcpy(dz, probs, bsz * classes * sizeof(double));
        const double inv_b = 1.0 / static_cast<double>(bsz);
        for (std::size_t i = 0; i < bsz; ++i) {
            const std::size_t label = batch[i].label;
            if (label >= classes) throw std::invalid_argument("mlp: label out of range");
            loss -= std::log(std::max(probs[i * classes + label], 1e-300));
            dz[i * classes + label] -= 1.0;
        }
        for (std::size_t k = 0; k < bsz * classes; ++k) dz[k] *= inv_b;
        loss *= inv_b;
    }

    for (std::size_t l = layers; l-- > 0;) {
        const auto m = static_cast<std::size_t>(model.layer_dims[l]);
        const auto n = static_cast<std::size_t>(model.layer_dims[l + 1]);
        const double* h = work.act[l].data();
        const double* dz = work.delta[l].data();
        double* dw = wgrads[l].data();
        for (std::size_t i = 0; i < bsz; ++i) {
            const double* hrow = h + i * m;
            const double* dzrow = dz + i * n;
            for (std::size_t k = 0; k < m; ++k) {
                const double hv = hrow[k];
                if (hv == 0.0) continue;
                double* dwrow = dw + k * n;
                for (std::size_t j = 0; j < n; ++j) dwrow[j] += hv * dzrow[j];
            }
        }
        double* db = bgrads[l].data();
        for (std::size_t i = 0; i < bsz; ++i) {
            const double* dzrow = dz + i * n;
            for (std::size_t j = 0; j < n; ++j) db[j] += dzrow[j];
        }
        if (l > 0) {
            // delta[l-1] = (delta[l] * W^T) masked by the rectifier.
            const double* w = model.weights[l].data();
            double* dprev = work.delta[l - 1].data();
            const double* zprev = work.pre[l - 1].data();
            for (std::size_t i = 0; i < bsz; ++i) {
                const double* dzrow = dz + i * n;
                double* drow = dprev + i * m;
                for (std::size_t k = 0; k < m; ++k) {
                    if (zprev[i * m + k] <= 0.0) {
                        drow[k] = 0.0;
                        continue;
                    }
                    const double* wrow = w + k * n;
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += dzrow[j] * wrow[j];
                    drow[k] = s;
                }
            }
        }
    }
    return loss;
}

void zero_like(const MlpModel& model, std::vector<std::vector<double>>& wgrads,
               std::vector<std::vector<double>>& bgrads) {
    wgrads.resize(model.weights.size());
    bgrads.resize(model.biases.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        wgrads[l].assign(model.weights[l].size(), 0.0);
        bgrads[l].assign(model.biases[l].size(), 0.0);
    }
}

}  // namespace

MlpModel init_model(const std::vector<int>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output layers");
    for (const int d : layer_dims) {
        if (d < 1) throw std::invalid_argument("mlp: zero-width layer");
    }
    MlpModel model;
    model.layer_dims = layer_dims;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(layer_dims[l]);
        const auto fan_out = static_cast<std::size_t>(layer_dims[l + 1]);
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        std::vector<double> w(fan_in * fan_out);
        for (double& v : w) v = rng.normal() * scale;
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> input) {
    if (static_cast<int>(input.size()) != model.input_width()) {
        throw std::invalid_argument("mlp: input width mismatch");
    }
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        const auto m = static_cast<std::size_t>(model.layer_dims[l]);
        const auto n = static_cast<std::size_t>(model.layer_dims[l + 1]);
        next.resize(n);
        matmul_bias(cur.data(), model.weights[l].data(), model.biases[l].data(), next.data(), 1,
                    m, n);
        if (l + 1 < layers) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        } else {
            softmax_rows(next.data(), 1, n);
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<double> forward(const MlpModel& model, std::span<const float> input) {
    std::vector<double> tmp(input.begin(), input.end());
    return forward(model, tmp);
}

double loss_and_gradients(const MlpModel& model, std::span<const ExperienceRecord> batch,
                          std::vector<std::vector<double>>& weight_grads,
                          std::vector<std::vector<double>>& bias_grads) {
    if (batch.empty()) throw std::invalid_argument("mlp: empty batch");
    BatchWork work;
    zero_like(model, weight_grads, bias_grads);
    return batch_pass(model, batch, work, weight_grads, bias_grads);
}

std::vector<double> train(MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
    if (cfg.epochs < 1 || cfg.batch_size < 1) {
        throw std::invalid_argument("mlp: epochs and batch size must be >= 1");
    }
    if (data.records.empty()) throw std::invalid_argument("mlp: empty training set");
    if (static_cast<int>(data.feature_width()) != model.input_width()) {
        throw std::invalid_argument("mlp: dataset width does not match the model");
    }

    std::vector<std::vector<double>> wgrads, bgrads, wm, wv, bm, bv;
    zero_like(model, wgrads, bgrads);
    zero_like(model, wm, bm);
    zero_like(model, wv, bv);

    std::vector<std::size_t> order(data.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<ExperienceRecord> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));

    Rng rng(cfg.seed);
    BatchWork work;
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs));
    std::int64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) shuffle(order.data(), order.size(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data.records[order[i]]);

            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                std::fill(wgrads[l].begin(), wgrads[l].end(), 0.0);
                std::fill(bgrads[l].begin(), bgrads[l].end(), 0.0);
            }
            const double loss = batch_pass(model, batch, work, wgrads, bgrads);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("mlp: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch offset " +
                                         std::to_string(start));
            }
            epoch_loss += loss * static_cast<double>(batch.size());

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            const auto adam = [&](std::vector<double>& p, std::vector<double>& g,
                                  std::vector<double>& m, std::vector<double>& v) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                    p[k] -= cfg.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg.epsilon);
                }
            };
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                adam(model.weights[l], wgrads[l], wm[l], wv[l]);
                adam(model.biases[l], bgrads[l], bm[l], bv[l]);
            }
        }
        history.push_back(epoch_loss / static_cast<double>(data.records.size()));
        if (cfg.verbose) {
            std::fprintf(stderr, "epoch %d loss %.5f\n", epoch, history.back());
        }
    }
    return history;
}

double accuracy(const MlpModel& model, const Dataset& data) {
    if (data.records.empty()) throw std::invalid_argument("mlp: empty evaluation set");
    std::int64_t hits = 0;
    for (const ExperienceRecord& rec : data.records) {
        const auto probs = forward(model, std::span<const float>(rec.features));
        const std::size_t arg = static_cast<std::size_t>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (arg == rec.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.records.size());
}

namespace {
constexpr char kModelMagic[8] = {'R', 'M', 'F', 'S', 'M', 'L', '0', '1'};
}

void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("model: cannot open " + path + " for writing");
    os.write(kModelMagic, sizeof(kModelMagic));
    const auto put32 = [&os](std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    const auto put64 = [&os](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    put32(static_cast<std::int32_t>(model.layer_dims.size()));
    for (const int d : model.layer_dims) put32(d);
    put32(model.r);
    put32(model.h);
    put32(model.locations);
    put64(model.layout_fingerprint);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        os.write(reinterpret_cast<const char*>(model.weights[l].data()),
                 static_cast<std::streamsize>(model.weights[l].size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(model.biases[l].data()),
                 static_cast<std::streamsize>(model.biases[l].size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("model: write failed for " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("model: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kModelMagic, sizeof(kModelMagic)) != 0) {
        throw std::runtime_error("model: bad magic in " + path);
    }
    const auto get32 = [&is] {
        std::int32_t v;
        is.read(reinterpret_cast<char*>(&v), 4);
        if (!is) throw std::runtime_error("model: truncated file");
        return v;
    };
    const auto get64 = [&is] {
        std::uint64_t v;
        is.read(reinterpret_cast<char*>(&v), 8);
        if (!is) throw std::runtime_error("model: truncated file");
        return v;
    };
    const std::int32_t n_dims = get32();
    if (n_dims < 2 || n_dims > 64) throw std::runtime_error("model: corrupt header in " + path);
    MlpModel model;
    model.layer_dims.resize(static_cast<std::size_t>(n_dims));
    for (auto& d : model.layer_dims) {
        d = get32();
        if (d < 1) throw std::runtime_error("model: corrupt layer dims in " + path);
    }
    model.r = get32();
    model.h = get32();
    model.locations = get32();
    model.layout_fingerprint = get64();
    if (model.locations != model.layer_dims.back()) {
        throw std::runtime_error("model: output layer does not match location count");
    }
    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(model.layer_dims[l]);
        const auto fan_out = static_cast<std::size_t>(model.layer_dims[l + 1]);
        std::vector<double> w(fan_in * fan_out);
        std::vector<double> b(fan_out);
        is.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(double)));
        is.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(double)));
        if (!is) throw std::runtime_error("model: truncated parameters in " + path);
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    return model;
}

namespace {

void check_model_matches(const MlpModel& model, const SimState& state) {
    if (model.locations != state.layout().location_count()) {
        throw std::invalid_argument("model: trained for a different location count");
    }
    if (model.layout_fingerprint != 0 &&
        model.layout_fingerprint != state.layout().fingerprint()) {
        throw std::invalid_argument("model: trained for a different layout");
    }
}

}  // namespace

int lp_decide(const MlpModel& model, const SimState& state) {
    check_model_matches(model, state);
    const auto feats = extract_features(state, model.r, model.h);
    const auto probs = forward(model, std::span<const float>(feats));
    int best = -1;
    double best_p = -1.0;
    for (const int loc : state.free_locations()) {  // ascending: ties keep lowest id
        if (probs[static_cast<std::size_t>(loc)] > best_p) {
            best_p = probs[static_cast<std::size_t>(loc)];
            best = loc;
        }
    }
    return best;
}

ActionPredictor make_mlp_predictor(const MlpModel* model) {
    return [model](const SimState& state, std::span<const std::int16_t> actions,
                   std::span<double> out) {
        check_model_matches(*model, state);
        const auto feats = extract_features(state, model->r, model->h);
        const auto probs = forward(*model, std::span<const float>(feats));
        double total = 0.0;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            out[i] = probs[static_cast<std::size_t>(actions[i])];
            total += out[i];
        }
        if (total <= 0.0) {
            const double uniform = 1.0 / static_cast<double>(actions.size());
            for (auto& v : out) v = uniform;
        } else {
            for (auto& v : out) v /= total;
        }
    };
}

}  // namespace rmfs
