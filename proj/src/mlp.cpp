#include "vprmon/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vprmon/errors.hpp"

namespace vprmon {
namespace {

constexpr double kStdGuard = 1e-12;
constexpr double kOutputClamp = 1e-12;  // keeps public outputs strictly inside (0, 1)

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Scratch {
    // Pre-activations and activations per layer for one sample.
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> h;
};

void forward_pass(const std::vector<Network::Layer>& layers, std::span<const double> x,
                  Scratch& s, const double* keep_mask) {
    s.z.resize(layers.size());
    s.h.resize(layers.size());
    std::span<const double> input = x;
    std::size_t mask_pos = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        auto& z = s.z[l];
        auto& h = s.h[l];
        z.assign(layer.out, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double* wrow = layer.w.data() + r * layer.in;
            double acc = layer.b[r];
            for (std::size_t c = 0; c < layer.in; ++c) acc += wrow[c] * input[c];
            z[r] = acc;
        }
        h = z;
        if (l + 1 < layers.size()) {
            for (double& v : h) v = v > 0.0 ? v : 0.0;  // ReLU
            if (keep_mask != nullptr) {
                for (double& v : h) v *= keep_mask[mask_pos++];
            }
        } else {
            h[0] = sigmoid(z[0]);
        }
        input = h;
    }
}

}  // namespace

double weighted_mse(std::span<const int> labels, std::span<const double> predictions,
                    double alpha) {
    if (labels.size() != predictions.size()) {
        throw DimensionError("weighted_mse length mismatch: " + std::to_string(labels.size()) +
                             " labels vs " + std::to_string(predictions.size()) +
                             " predictions");
    }
    if (labels.empty()) throw ConfigError("weighted_mse on empty input");
    if (alpha < 0.0 || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
    double acc = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] != 0 && labels[k] != 1) {
            throw ConfigError("weighted_mse labels must be binary");
        }
        const double d = static_cast<double>(labels[k]) - predictions[k];
        acc += labels[k] == 1 ? d * d : alpha * d * d;
    }
    return acc / static_cast<double>(labels.size());
}

double forward(const MlpModel& model, std::span<const double> x) {
    if (model.layers.empty()) throw ConfigError("model has no layers");
    if (x.size() != model.input_dim()) {
        throw DimensionError("model expects input dimension " +
                             std::to_string(model.input_dim()) + ", got " +
                             std::to_string(x.size()));
    }
    std::vector<double> cur(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double sd = std::max(static_cast<double>(model.norm_std[i]), kStdGuard);
        cur[i] = (x[i] - static_cast<double>(model.norm_mean[i])) / sd;
    }
    std::vector<double> next;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        next.assign(layer.out, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const float* wrow = layer.w.data() + r * layer.in;
            double acc = static_cast<double>(layer.b[r]);
            for (std::size_t c = 0; c < layer.in; ++c) {
                acc += static_cast<double>(wrow[c]) * cur[c];
            }
            next[r] = l + 1 < model.layers.size() ? (acc > 0.0 ? acc : 0.0) : sigmoid(acc);
        }
        cur.swap(next);
    }
    return std::clamp(cur[0], kOutputClamp, 1.0 - kOutputClamp);
}

PredictionRecord predict(const MlpModel& model, std::span<const double> x) {
    const double raw = forward(model, x);
    return PredictionRecord{raw, raw >= model.threshold ? 1 : 0};
}

Network::Network(std::size_t input_dim, std::size_t hidden_layers, std::size_t hidden_units)
    : input_dim_(input_dim) {
    if (input_dim == 0 || hidden_layers == 0 || hidden_units == 0) {
        throw ConfigError("network dimensions must be positive");
    }
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < hidden_layers; ++l) {
        layers_.push_back(Layer{hidden_units, in, std::vector<double>(hidden_units * in, 0.0),
                                std::vector<double>(hidden_units, 0.0)});
        in = hidden_units;
    }
    layers_.push_back(Layer{1, in, std::vector<double>(in, 0.0), std::vector<double>(1, 0.0)});
}

void Network::init_weights(SeededRng& rng) {
    for (auto& layer : layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (double& w : layer.w) w = rng.uniform(-bound, bound);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

double Network::forward(std::span<const double> x) const {
    Scratch s;
    forward_pass(layers_, x, s, nullptr);
    return s.h.back()[0];
}

double Network::loss(std::span<const std::pair<std::vector<double>, int>> batch,
                     double alpha) const {
    std::vector<int> labels;
    std::vector<double> preds;
    labels.reserve(batch.size());
    preds.reserve(batch.size());
    for (const auto& [x, y] : batch) {
        labels.push_back(y);
        preds.push_back(forward(x));
    }
    return weighted_mse(labels, preds, alpha);
}

Network::Gradients Network::zero_gradients() const {
    Gradients g;
    g.layers.reserve(layers_.size());
    for (const auto& layer : layers_) {
        g.layers.push_back(Layer{layer.out, layer.in,
                                 std::vector<double>(layer.w.size(), 0.0),
                                 std::vector<double>(layer.b.size(), 0.0)});
    }
    return g;
}

double Network::loss_and_gradients(std::span<const std::pair<std::vector<double>, int>> batch,
                                   double alpha, Gradients& grads,
                                   const std::vector<std::vector<double>>* keep_masks) const {
    if (batch.empty()) throw ConfigError("empty batch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    Scratch s;
    std::vector<std::vector<double>> delta(layers_.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto& [x, y] = batch[k];
        const double* mask =
            keep_masks != nullptr ? (*keep_masks)[k].data() : nullptr;
        forward_pass(layers_, x, s, mask);
        const double p = s.h.back()[0];
        const double weight = y == 1 ? 1.0 : alpha;
        const double diff = static_cast<double>(y) - p;
        total += weight * diff * diff;

        // dL/dp for this sample (batch-mean applied through inv_n),
        // then through the sigmoid: dp/dz = p(1-p).
        const double dp = -2.0 * weight * diff * inv_n;
        const std::size_t last = layers_.size() - 1;
        delta[last].assign(1, dp * p * (1.0 - p));
        for (std::size_t l = last; l-- > 0;) {
            const auto& above = layers_[l + 1];
            delta[l].assign(layers_[l].out, 0.0);
            for (std::size_t c = 0; c < above.in; ++c) {
                double acc = 0.0;
                for (std::size_t r = 0; r < above.out; ++r) {
                    acc += above.w[r * above.in + c] * delta[l + 1][r];
                }
                delta[l][c] = acc;
            }
            // Back through dropout mask and ReLU on this hidden layer.
            std::size_t mask_base = 0;
            for (std::size_t j = 0; j < l; ++j) mask_base += layers_[j].out;
            for (std::size_t c = 0; c < layers_[l].out; ++c) {
                if (mask != nullptr) delta[l][c] *= mask[mask_base + c];
                if (s.z[l][c] <= 0.0) delta[l][c] = 0.0;
            }
        }
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const std::span<const double> input =
                l == 0 ? std::span<const double>(x) : std::span<const double>(s.h[l - 1]);
            auto& gl = grads.layers[l];
            for (std::size_t r = 0; r < layers_[l].out; ++r) {
                const double d = delta[l][r];
                if (d == 0.0) continue;
                double* grow = gl.w.data() + r * layers_[l].in;
                for (std::size_t c = 0; c < layers_[l].in; ++c) grow[c] += d * input[c];
                gl.b[r] += d;
            }
        }
    }
    return total * inv_n;
}

MlpModel Network::finalize(std::span<const double> norm_mean, std::span<const double> norm_std,
                           double threshold, std::uint32_t catalogue_version,
                           double alpha) const {
    if (norm_mean.size() != input_dim_ || norm_std.size() != input_dim_) {
        throw DimensionError("normalization statistics must match the input dimension");
    }
    MlpModel model;
    model.layers.reserve(layers_.size());
    for (const auto& layer : layers_) {
        MlpLayer out;
        out.out = layer.out;
        out.in = layer.in;
        out.w.assign(layer.w.begin(), layer.w.end());
        out.b.assign(layer.b.begin(), layer.b.end());
        model.layers.push_back(std::move(out));
    }
    model.norm_mean.assign(norm_mean.begin(), norm_mean.end());
    model.norm_std.resize(norm_std.size());
    for (std::size_t i = 0; i < norm_std.size(); ++i) {
        model.norm_std[i] = static_cast<float>(std::max(norm_std[i], kStdGuard));
    }
    model.threshold = threshold;
    model.catalogue_version = catalogue_version;
    model.alpha_used = alpha;
    return model;
}

double choose_alpha_default(double out_of_tolerance_fraction) {
    if (!(out_of_tolerance_fraction > 0.0 && out_of_tolerance_fraction < 1.0)) {
        throw ConfigError("out-of-tolerance fraction must be strictly inside (0, 1)");
    }
    // Reference operating points, sorted by fraction.
    struct Knot {
        double fraction;
        double alpha;
    };
    constexpr Knot knots[3] = {{0.133, 35.0}, {0.436, 6.0}, {0.472, 3.0}};
    const double f = out_of_tolerance_fraction;
    if (f <= knots[0].fraction) return knots[0].alpha;
    if (f >= knots[2].fraction) return knots[2].alpha;
    for (int i = 0; i < 2; ++i) {
        if (f <= knots[i + 1].fraction) {
            const double u = 1.0 / f;
            const double u0 = 1.0 / knots[i].fraction;
            const double u1 = 1.0 / knots[i + 1].fraction;
            const double t = (u - u0) / (u1 - u0);
            return knots[i].alpha + t * (knots[i + 1].alpha - knots[i].alpha);
        }
    }
    return knots[2].alpha;
}

namespace {

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std_dev;
};

NormStats normalization_stats(const TrainingSet& dataset) {
    const std::size_t dim = dataset.front().first.size();
    NormStats ns;
    ns.mean.assign(dim, 0.0);
    ns.std_dev.assign(dim, 0.0);
    for (const auto& [x, y] : dataset) {
        for (std::size_t i = 0; i < dim; ++i) ns.mean[i] += x[i];
    }
    for (double& m : ns.mean) m /= static_cast<double>(dataset.size());
    for (const auto& [x, y] : dataset) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = x[i] - ns.mean[i];
            ns.std_dev[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        double s = std::sqrt(ns.std_dev[i] / static_cast<double>(dataset.size()));
        // Relative floor: the statistics are stored as f32, and on a
        // near-constant dimension a bare absolute guard would let the
        // rounding of the mean shift z-scores by millions of sigmas.
        const double floor = std::max(kStdGuard, 1e-6 * std::fabs(ns.mean[i]));
        ns.std_dev[i] = s < floor ? floor : s;
    }
    return ns;
}

}  // namespace

TrainResult train(const TrainingSet& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw TrainError("training set is empty");
    const std::size_t dim = dataset.front().first.size();
    if (dim == 0) throw TrainError("training inputs are empty vectors");
    std::size_t positives = 0;
    for (const auto& [x, y] : dataset) {
        if (x.size() != dim) throw DimensionError("inconsistent training input dimensions");
        if (y != 0 && y != 1) throw TrainError("training labels must be binary");
        positives += static_cast<std::size_t>(y);
    }
    if (positives == 0 || positives == dataset.size()) {
        throw TrainError(
            "single-class training set: alpha has no effect and precision is undefined; "
            "provide both in-tolerance and out-of-tolerance samples");
    }
    if (cfg.alpha < 1.0) throw ConfigError("alpha must be >= 1");
    if (cfg.batch_size == 0 || cfg.epochs == 0) throw ConfigError("batch_size and epochs must be positive");
    if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");

    const NormStats ns = normalization_stats(dataset);
    TrainingSet normalized(dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        normalized[k].second = dataset[k].second;
        normalized[k].first.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            normalized[k].first[i] = (dataset[k].first[i] - ns.mean[i]) / ns.std_dev[i];
        }
    }

    SeededRng rng(cfg.seed);
    Network net(dim, cfg.hidden_layers, cfg.hidden_units);
    net.init_weights(rng);

    // Adam moments, laid out like the parameters.
    auto m1 = net.zero_gradients();
    auto m2 = net.zero_gradients();
    double beta1_t = 1.0;
    double beta2_t = 1.0;
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kAdamEps = 1e-8;

    std::size_t hidden_total = 0;
    for (std::size_t l = 0; l + 1 < net.layers().size(); ++l) {
        hidden_total += net.layers()[l].out;
    }

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.log.reserve(cfg.epochs);

    std::vector<std::pair<std::vector<double>, int>> batch;
    std::vector<std::vector<double>> masks;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            batch.clear();
            masks.clear();
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(normalized[order[i]]);
                if (cfg.dropout > 0.0) {
                    std::vector<double> mask(hidden_total);
                    const double keep_scale = 1.0 / (1.0 - cfg.dropout);
                    for (double& v : mask) {
                        v = rng.uniform01() < cfg.dropout ? 0.0 : keep_scale;
                    }
                    masks.push_back(std::move(mask));
                }
            }
            auto grads = net.zero_gradients();
            net.loss_and_gradients(batch, cfg.alpha, grads,
                                   cfg.dropout > 0.0 ? &masks : nullptr);

            if (cfg.optimizer == Optimizer::Sgd) {
                for (std::size_t l = 0; l < net.layers().size(); ++l) {
                    auto& layer = net.layers()[l];
                    const auto& g = grads.layers[l];
                    for (std::size_t i = 0; i < layer.w.size(); ++i) {
                        layer.w[i] -= cfg.learning_rate * g.w[i];
                    }
                    for (std::size_t i = 0; i < layer.b.size(); ++i) {
                        layer.b[i] -= cfg.learning_rate * g.b[i];
                    }
                }
            } else {
                beta1_t *= kBeta1;
                beta2_t *= kBeta2;
                const double corr1 = 1.0 - beta1_t;
                const double corr2 = 1.0 - beta2_t;
                for (std::size_t l = 0; l < net.layers().size(); ++l) {
                    auto& layer = net.layers()[l];
                    const auto& g = grads.layers[l];
                    auto step = [&](double& param, double& mm, double& vv, double grad) {
                        mm = kBeta1 * mm + (1.0 - kBeta1) * grad;
                        vv = kBeta2 * vv + (1.0 - kBeta2) * grad * grad;
                        const double mhat = mm / corr1;
                        const double vhat = vv / corr2;
                        param -= cfg.learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
                    };
                    for (std::size_t i = 0; i < layer.w.size(); ++i) {
                        step(layer.w[i], m1.layers[l].w[i], m2.layers[l].w[i], g.w[i]);
                    }
                    for (std::size_t i = 0; i < layer.b.size(); ++i) {
                        step(layer.b[i], m1.layers[l].b[i], m2.layers[l].b[i], g.b[i]);
                    }
                }
            }
        }

        // Clean full pass for the log: loss plus training precision/recall.
        double loss_acc = 0.0;
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (const auto& [x, y] : normalized) {
            const double p = net.forward(x);
            const double diff = static_cast<double>(y) - p;
            loss_acc += (y == 1 ? 1.0 : cfg.alpha) * diff * diff;
            const int pred = p >= cfg.threshold ? 1 : 0;
            if (pred == 1 && y == 1) ++tp;
            if (pred == 1 && y == 0) ++fp;
            if (pred == 0 && y == 1) ++fn;
        }
        TrainEpoch entry;
        entry.epoch = epoch;
        entry.loss = loss_acc / static_cast<double>(dataset.size());
        entry.precision = tp + fp == 0 ? 0.0
                                       : static_cast<double>(tp) / static_cast<double>(tp + fp);
        entry.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        result.log.push_back(entry);

        if (cfg.plateau_window > 0 && result.log.size() > cfg.plateau_window) {
            const double before =
                result.log[result.log.size() - 1 - cfg.plateau_window].loss;
            const double now = entry.loss;
            const double rel = (before - now) / std::max(std::fabs(before), 1e-300);
            if (rel < cfg.plateau_rel_improvement) break;
        }
    }

    result.model = net.finalize(ns.mean, ns.std_dev, cfg.threshold, 1, cfg.alpha);
    return result;
}

}  // namespace vprmon
