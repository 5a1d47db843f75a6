#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vprmon/rng.hpp"

namespace vprmon {

/// One affine layer of the finalized model. Weights are row-major
/// (out x in) 32-bit floats, matching the on-disk format; inference
/// upcasts to double.
struct MlpLayer {
    std::size_t out = 0;
    std::size_t in = 0;
    std::vector<float> w;
    std::vector<float> b;
};

/// Finalized integrity monitor: hidden ReLU layers, one Sigmoid output,
/// z-score input normalization, and a decision threshold. Immutable
/// after training.
struct MlpModel {
    std::vector<MlpLayer> layers;  // hidden layers then the 1-unit output
    std::vector<float> norm_mean;
    std::vector<float> norm_std;   // guarded > 0
    double threshold = 0.5;
    std::uint32_t catalogue_version = 1;
    double alpha_used = 1.0;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t hidden_count() const { return layers.empty() ? 0 : layers.size() - 1; }
};

struct PredictionRecord {
    double raw = 0.0;  // continuous prediction in (0, 1)
    int binary = 0;    // 1 iff raw >= threshold
};

/// Weighted mean-squared error: out-of-tolerance terms (label 0) are
/// scaled by alpha, giving control over how cautious the monitor is.
double weighted_mse(std::span<const int> labels, std::span<const double> predictions,
                    double alpha);

/// Normalized input through all layers; output clamped into (0, 1).
double forward(const MlpModel& model, std::span<const double> x);

PredictionRecord predict(const MlpModel& model, std::span<const double> x);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    double alpha = 1.0;
    std::size_t batch_size = 8;
    double learning_rate = 1e-5;
    double dropout = 0.10;
    std::size_t epochs = 500;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    std::size_t hidden_layers = 4;
    std::size_t hidden_units = 128;
    double threshold = 0.5;
    // Early stop once the relative loss improvement over this many
    // epochs falls below the bound. Zero disables it.
    std::size_t plateau_window = 50;
    double plateau_rel_improvement = 1e-4;
};

struct TrainEpoch {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;      // weighted MSE over the full training set
    double precision = 0.0;
    double recall = 0.0;
};

using TrainingSet = std::vector<std::pair<std::vector<double>, int>>;

struct TrainResult {
    MlpModel model;
    std::vector<TrainEpoch> log;
};

/// Deterministic given cfg.seed: fixed init, shuffle, and dropout masks.
/// Refuses single-class datasets.
TrainResult train(const TrainingSet& dataset, const TrainConfig& cfg);

/// Advisory alpha from the training label balance, interpolating the
/// reference operating points (0.133 -> 35, 0.436 -> 6, 0.472 -> 3)
/// linearly in 1/fraction and clamping outside that range.
double choose_alpha_default(double out_of_tolerance_fraction);

/// Double-precision network used by the trainer. Exposed so gradients
/// can be verified against finite differences.
class Network {
public:
    struct Layer {
        std::size_t out = 0;
        std::size_t in = 0;
        std::vector<double> w;  // row-major out x in
        std::vector<double> b;
    };

    Network(std::size_t input_dim, std::size_t hidden_layers, std::size_t hidden_units);

    /// Symmetric uniform fan-in init: U(-1/sqrt(in), 1/sqrt(in)); zero biases.
    void init_weights(SeededRng& rng);

    std::size_t input_dim() const { return input_dim_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    /// Raw sigmoid output, no dropout, no clamping.
    double forward(std::span<const double> x) const;

    /// Weighted MSE over a batch (no dropout).
    double loss(std::span<const std::pair<std::vector<double>, int>> batch,
                double alpha) const;

    /// Gradient container with the same shape as the parameters.
    struct Gradients {
        std::vector<Layer> layers;
    };
    Gradients zero_gradients() const;

    /// Accumulates exact backprop gradients of the batch loss into
    /// `grads` and returns the loss. `keep_masks`, when given, holds one
    /// multiplier per hidden activation per sample (inverted dropout).
    double loss_and_gradients(std::span<const std::pair<std::vector<double>, int>> batch,
                              double alpha, Gradients& grads,
                              const std::vector<std::vector<double>>* keep_masks = nullptr) const;

    MlpModel finalize(std::span<const double> norm_mean, std::span<const double> norm_std,
                      double threshold, std::uint32_t catalogue_version, double alpha) const;

private:
    std::size_t input_dim_;
    std::vector<Layer> layers_;
};

}  // namespace vprmon
