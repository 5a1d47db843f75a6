#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "vprmon/errors.hpp"
#include "vprmon/featurizer.hpp"
#include "vprmon/mlp.hpp"
#include "vprmon/rng.hpp"
#include "vprmon/synthetic.hpp"

using namespace vprmon;

namespace {

// Plain unweighted MSE oracle.
double mse_oracle(std::span<const int> labels, std::span<const double> preds) {
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        acc += (labels[i] - preds[i]) * (labels[i] - preds[i]);
    }
    return acc / static_cast<double>(labels.size());
}

// Independent matrix-loop forward oracle mirroring the documented
// definition: z-score, affine+ReLU hidden layers, affine+Sigmoid output,
// clamped into (0,1).
double forward_oracle(const MlpModel& model, const std::vector<double>& x) {
    std::vector<double> cur(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        cur[i] = (x[i] - double(model.norm_mean[i])) /
                 std::max(double(model.norm_std[i]), 1e-12);
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        std::vector<double> next(layer.out, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            double acc = layer.b[r];
            for (std::size_t c = 0; c < layer.in; ++c) {
                acc += double(layer.w[r * layer.in + c]) * cur[c];
            }
            if (l + 1 < model.layers.size()) {
                next[r] = std::max(acc, 0.0);
            } else {
                next[r] = 1.0 / (1.0 + std::exp(-acc));
            }
        }
        cur = next;
    }
    return std::clamp(cur[0], 1e-12, 1.0 - 1e-12);
}

// Two well-separated Gaussian clusters in the given dimension.
TrainingSet two_cluster_set(std::size_t count, std::size_t dim, std::uint64_t seed,
                            double separation, double spread) {
    SeededRng rng(seed);
    TrainingSet set;
    for (std::size_t i = 0; i < count; ++i) {
        const int label = i % 2 == 0 ? 1 : 0;
        std::vector<double> x(dim);
        const double center = label == 1 ? separation : -separation;
        for (auto& v : x) v = center + spread * rng.normal();
        set.emplace_back(std::move(x), label);
    }
    return set;
}

double centroid_classifier_accuracy(const TrainingSet& set) {
    const std::size_t dim = set.front().first.size();
    std::vector<double> c0(dim, 0.0);
    std::vector<double> c1(dim, 0.0);
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    for (const auto& [x, y] : set) {
        auto& c = y == 1 ? c1 : c0;
        for (std::size_t i = 0; i < dim; ++i) c[i] += x[i];
        (y == 1 ? n1 : n0) += 1;
    }
    for (auto& v : c0) v /= static_cast<double>(n0);
    for (auto& v : c1) v /= static_cast<double>(n1);
    std::size_t correct = 0;
    for (const auto& [x, y] : set) {
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            d0 += (x[i] - c0[i]) * (x[i] - c0[i]);
            d1 += (x[i] - c1[i]) * (x[i] - c1[i]);
        }
        const int pred = d1 < d0 ? 1 : 0;
        if (pred == y) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

double model_accuracy(const MlpModel& model, const TrainingSet& set) {
    std::size_t correct = 0;
    for (const auto& [x, y] : set) {
        if (predict(model, x).binary == y) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

}  // namespace

TEST_CASE("weighted mse basics") {
    SUBCASE("perfect fit is zero for any alpha") {
        std::vector<int> p = {1, 0};
        std::vector<double> ph = {1.0, 0.0};
        CHECK(weighted_mse(p, ph, 1.0) == 0.0);
        CHECK(weighted_mse(p, ph, 35.0) == 0.0);
    }
    SUBCASE("hand-evaluated weighted case") {
        std::vector<int> p = {1, 0};
        std::vector<double> ph = {0.5, 0.5};
        CHECK(weighted_mse(p, ph, 6.0) == doctest::Approx(0.875).epsilon(1e-15));
    }
    SUBCASE("alpha = 1 reduces to plain mse") {
        SeededRng rng(2);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + rng.index(40);
            std::vector<int> labels(n);
            std::vector<double> preds(n);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
                preds[i] = rng.uniform01();
            }
            CHECK(std::fabs(weighted_mse(labels, preds, 1.0) - mse_oracle(labels, preds)) <=
                  1e-12);
        }
    }
    SUBCASE("errors") {
        std::vector<int> p = {1};
        std::vector<double> ph = {0.5, 0.5};
        CHECK_THROWS_AS(weighted_mse(p, ph, 1.0), DimensionError);
        CHECK_THROWS_AS(
            weighted_mse(std::vector<int>{}, std::vector<double>{}, 1.0), ConfigError);
    }
}

TEST_CASE("weighted mse is non-negative and zero only on exact fit") {
    SeededRng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(20);
        std::vector<int> labels(n);
        std::vector<double> preds(n);
        bool exact = true;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
            preds[i] = rng.uniform01() < 0.3 ? double(labels[i]) : rng.uniform01();
            if (preds[i] != double(labels[i])) exact = false;
        }
        const double loss = weighted_mse(labels, preds, rng.uniform(1.0, 40.0));
        CHECK(loss >= 0.0);
        CHECK((loss == 0.0) == exact);
    }
}

TEST_CASE("forward of the all-zero network is one half") {
    MlpModel model;
    std::size_t in = 6;
    for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t out = l == 2 ? 1 : 4;
        MlpLayer layer;
        layer.out = out;
        layer.in = in;
        layer.w.assign(out * in, 0.0F);
        layer.b.assign(out, 0.0F);
        model.layers.push_back(layer);
        in = out;
    }
    model.norm_mean.assign(6, 0.0F);
    model.norm_std.assign(6, 1.0F);
    SeededRng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-10.0, 10.0);
        CHECK(forward(model, x) == 0.5);
    }
}

TEST_CASE("forward output is strictly inside (0,1) even for saturating weights") {
    auto model = testutil::random_model(8, 2, 8, 5);
    for (auto& layer : model.layers) {
        for (auto& w : layer.w) w *= 1000.0F;  // force saturation
    }
    SeededRng rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform(-50.0, 50.0);
        const double p = forward(model, x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("forward matches the naive matrix-loop oracle") {
    const auto model = testutil::random_model(4, 4, 4, 12);
    SeededRng rng(14);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        CHECK(std::fabs(forward(model, x) - forward_oracle(model, x)) <= 1e-10);
    }
    CHECK_THROWS_AS(forward(model, std::vector<double>(5, 0.0)), DimensionError);
}

TEST_CASE("binarization is threshold-monotone") {
    auto model = testutil::random_model(8, 1, 8, 19);
    SeededRng rng(20);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        auto lower = model;
        auto higher = model;
        lower.threshold = rng.uniform(0.05, 0.5);
        higher.threshold = lower.threshold + rng.uniform(0.0, 0.45);
        CHECK(predict(higher, x).binary <= predict(lower, x).binary);
    }
}

TEST_CASE("training is deterministic given the seed") {
    const auto set = two_cluster_set(60, 16, 33, 1.0, 0.5);
    TrainConfig cfg;
    cfg.alpha = 2.0;
    cfg.epochs = 10;
    cfg.seed = 1;
    cfg.hidden_layers = 2;
    cfg.hidden_units = 8;
    cfg.learning_rate = 1e-3;
    const auto a = train(set, cfg);
    const auto b = train(set, cfg);
    REQUIRE(a.model.layers.size() == b.model.layers.size());
    for (std::size_t l = 0; l < a.model.layers.size(); ++l) {
        CHECK(a.model.layers[l].w == b.model.layers[l].w);
        CHECK(a.model.layers[l].b == b.model.layers[l].b);
    }
    cfg.seed = 2;
    const auto c = train(set, cfg);
    CHECK(a.model.layers[0].w != c.model.layers[0].w);
}

TEST_CASE("separable clusters train to high accuracy") {
    const auto set = two_cluster_set(200, 192, 44, 1.0, 0.4);
    CHECK(centroid_classifier_accuracy(set) == 1.0);  // separability oracle

    TrainConfig cfg;
    cfg.alpha = 1.0;
    cfg.epochs = 200;
    cfg.seed = 7;
    cfg.learning_rate = 1e-4;
    cfg.dropout = 0.10;
    cfg.plateau_window = 0;
    const auto result = train(set, cfg);
    CHECK(model_accuracy(result.model, set) >= 0.95);
    CHECK(result.log.back().loss < result.log.front().loss);
}

TEST_CASE("raising alpha never lowers the out-of-tolerance prediction rate") {
    // A noisy synthetic VPR fixture gives genuine borderline matches for
    // alpha to push around.
    SynthConfig synth;
    synth.n = 160;
    synth.m = 48;
    synth.spacing = 0.3;
    synth.aliasing_rate = 0.2;
    synth.noise_sigma = 0.08;
    synth.seed = 55;
    const auto ds = generate_synthetic(synth);
    const ToleranceConfig tol{0.5, DistanceMode::AlongTrack};
    const auto matches = compute_matches(ds.traverse, ds.queries,
                                         DistanceMetric::Euclidean, tol);
    TrainingSet set;
    for (const auto& m : matches) {
        const auto bundle = make_bundle(m, ds.queries.features.row(m.query_index),
                                        ds.traverse);
        const auto input = featurize(bundle);
        set.emplace_back(std::vector<double>(input.begin(), input.end()), m.label);
    }

    double previous_rate = -1.0;
    for (const double alpha : {1.0, 6.0, 35.0}) {
        TrainConfig cfg;
        cfg.alpha = alpha;
        cfg.epochs = 80;
        cfg.seed = 5;
        cfg.hidden_layers = 2;
        cfg.hidden_units = 16;
        cfg.learning_rate = 1e-3;
        cfg.dropout = 0.0;
        cfg.plateau_window = 0;
        const auto result = train(set, cfg);
        std::size_t zeros = 0;
        for (const auto& [x, y] : set) {
            if (predict(result.model, x).binary == 0) ++zeros;
        }
        const double rate = static_cast<double>(zeros) / static_cast<double>(set.size());
        CHECK(rate >= previous_rate);
        previous_rate = rate;
    }
}

TEST_CASE("single-class datasets are refused with a diagnostic") {
    TrainingSet set;
    for (int i = 0; i < 10; ++i) set.emplace_back(std::vector<double>(4, double(i)), 1);
    TrainConfig cfg;
    CHECK_THROWS_WITH_AS(train(set, cfg), doctest::Contains("single-class"), TrainError);
}

TEST_CASE("backprop matches central finite differences on a small model") {
    SeededRng rng(71);
    const std::size_t dim = 8;
    TrainingSet batch;
    for (int i = 0; i < 16; ++i) {
        std::vector<double> x(dim);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        batch.emplace_back(std::move(x), i % 2);
    }
    Network net(dim, 4, 8);
    net.init_weights(rng);
    const double alpha = 6.0;

    auto grads = net.zero_gradients();
    net.loss_and_gradients(batch, alpha, grads);

    const double h = 1e-5;
    std::size_t checked = 0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& layer = net.layers()[l];
        for (std::size_t i = 0; i < layer.w.size(); i += 5) {  // sample every 5th weight
            const double saved = layer.w[i];
            layer.w[i] = saved + h;
            const double up = net.loss(batch, alpha);
            layer.w[i] = saved - h;
            const double down = net.loss(batch, alpha);
            layer.w[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double bp = grads.layers[l].w[i];
            CHECK(std::fabs(fd - bp) <= 1e-4 * std::max({1.0, std::fabs(fd), std::fabs(bp)}));
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("alpha lookup hits the reference operating points") {
    CHECK(choose_alpha_default(0.436) == doctest::Approx(6.0));
    CHECK(choose_alpha_default(0.472) == doctest::Approx(3.0));
    CHECK(choose_alpha_default(0.133) == doctest::Approx(35.0));
    CHECK(choose_alpha_default(0.05) == doctest::Approx(35.0));   // clamped
    CHECK(choose_alpha_default(0.9) == doctest::Approx(3.0));     // clamped
    const double mid = choose_alpha_default(0.2);
    CHECK(mid > 6.0);
    CHECK(mid < 35.0);
    CHECK_THROWS_AS(choose_alpha_default(0.0), ConfigError);
    CHECK_THROWS_AS(choose_alpha_default(1.0), ConfigError);
}
