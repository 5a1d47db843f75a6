#include "vprmon/matcher.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vprmon/errors.hpp"

namespace vprmon {
namespace {

double euclidean(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    const double denom = std::sqrt(na) * std::sqrt(nb);
    if (denom < 1e-300) return 1.0;  // zero vector: treat similarity as 0
    double d = 1.0 - dot / denom;
    if (d < 0.0) d = 0.0;  // floating slop on identical unit vectors
    return d;
}

}  // namespace

const char* to_string(DistanceMetric metric) {
    return metric == DistanceMetric::Euclidean ? "euclidean" : "cosine";
}

DistanceMetric distance_metric_from_string(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::Euclidean;
    if (s == "cosine") return DistanceMetric::Cosine;
    throw ConfigError("unknown distance metric: " + s);
}

std::vector<double> distance_vector(std::span<const float> query_feature,
                                    const Traverse& traverse, DistanceMetric metric) {
    if (query_feature.size() != traverse.features.dim()) {
        throw DimensionError("query feature dimension " + std::to_string(query_feature.size()) +
                             " does not match reference dimension " +
                             std::to_string(traverse.features.dim()));
    }
    const std::size_t n = traverse.features.rows();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ref = traverse.features.row(i);
        out[i] = metric == DistanceMetric::Euclidean ? euclidean(query_feature, ref)
                                                     : cosine_distance(query_feature, ref);
    }
    return out;
}

std::size_t best_match(std::span<const double> distances) {
    if (distances.empty()) throw ConfigError("best_match on empty distance vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < distances.size(); ++i) {
        if (distances[i] < distances[best]) best = i;
    }
    return best;
}

std::size_t nearest_reference(const Pose2D& pose, const Traverse& traverse) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traverse.poses.size(); ++i) {
        const double d = planar_distance(pose, traverse.poses[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

LabelResult label_match(const Pose2D& pose_estimate, const Pose2D& ground_truth,
                        const Traverse& traverse, const ToleranceConfig& cfg) {
    if (cfg.tolerance <= 0.0) throw ConfigError("tolerance must be > 0");
    double error = 0.0;
    if (cfg.mode == DistanceMode::AlongTrack) {
        const std::size_t i_est = nearest_reference(pose_estimate, traverse);
        const std::size_t i_gt = nearest_reference(ground_truth, traverse);
        error = std::fabs(traverse.odom[i_est] - traverse.odom[i_gt]);
    } else {
        error = planar_distance(pose_estimate, ground_truth);
    }
    return LabelResult{error, error <= cfg.tolerance ? 1 : 0};
}

std::vector<MatchRecord> compute_matches(const Traverse& traverse,
                                         const QueryStream& queries,
                                         DistanceMetric metric,
                                         const ToleranceConfig& cfg) {
    validate_query_stream(queries, traverse.features.dim());
    std::vector<MatchRecord> records;
    records.reserve(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        MatchRecord rec;
        rec.query_index = k;
        rec.distances = distance_vector(queries.features.row(k), traverse, metric);
        rec.best_index = best_match(rec.distances);
        rec.pose_estimate = traverse.poses[rec.best_index];
        const auto lab = label_match(rec.pose_estimate, queries.ground_truth[k], traverse, cfg);
        rec.gt_error = lab.gt_error;
        rec.label = lab.label;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace vprmon
