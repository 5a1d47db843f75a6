#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vprmon/mlp.hpp"
#include "vprmon/rng.hpp"
#include "vprmon/types.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vprmon_test_" + tag + "_" + std::to_string(counter++) + "_" +
                 std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Straight-line traverse along +x with the given spacing and random
/// unit features.
inline vprmon::Traverse line_traverse(std::size_t n, std::size_t m, double spacing,
                                      std::uint64_t seed = 1) {
    vprmon::Traverse t;
    vprmon::SeededRng rng(seed);
    t.features = vprmon::FeatureMatrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        t.poses.push_back(vprmon::Pose2D{spacing * static_cast<double>(i), 0.0, 0.0});
        double norm = 0.0;
        std::vector<double> v(m);
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        auto row = t.features.row(i);
        for (std::size_t j = 0; j < m; ++j) row[j] = static_cast<float>(v[j] / norm);
    }
    t.odom = vprmon::derive_odom(t.poses);
    t.label = "line";
    return t;
}

/// Random small model with the given shape, for serialization and
/// forward tests.
inline vprmon::MlpModel random_model(std::size_t input_dim, std::size_t hidden_layers,
                                     std::size_t hidden_units, std::uint64_t seed) {
    vprmon::SeededRng rng(seed);
    vprmon::MlpModel model;
    std::size_t in = input_dim;
    for (std::size_t l = 0; l <= hidden_layers; ++l) {
        const std::size_t out = l == hidden_layers ? 1 : hidden_units;
        vprmon::MlpLayer layer;
        layer.out = out;
        layer.in = in;
        layer.w.resize(out * in);
        layer.b.resize(out);
        for (auto& w : layer.w) w = static_cast<float>(rng.uniform(-0.5, 0.5));
        for (auto& b : layer.b) b = static_cast<float>(rng.uniform(-0.1, 0.1));
        model.layers.push_back(std::move(layer));
        in = out;
    }
    model.norm_mean.resize(input_dim);
    model.norm_std.resize(input_dim);
    for (auto& v : model.norm_mean) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (auto& v : model.norm_std) v = static_cast<float>(rng.uniform(0.5, 2.0));
    model.threshold = 0.5;
    model.catalogue_version = 1;
    model.alpha_used = 1.0;
    return model;
}

}  // namespace testutil
