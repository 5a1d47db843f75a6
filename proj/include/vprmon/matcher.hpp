#pragma once

#include <span>
#include <string>
#include <vector>

#include "vprmon/types.hpp"

namespace vprmon {

enum class DistanceMetric { Euclidean, Cosine };

const char* to_string(DistanceMetric metric);
DistanceMetric distance_metric_from_string(const std::string& s);

/// Match distances from one query feature to every reference.
/// All outputs are finite and non-negative.
std::vector<double> distance_vector(std::span<const float> query_feature,
                                    const Traverse& traverse, DistanceMetric metric);

/// First index achieving the minimum. Throws on an empty vector.
std::size_t best_match(std::span<const double> distances);

struct LabelResult {
    double gt_error = 0.0;  // meters
    int label = 0;          // 1 iff gt_error <= cfg.tolerance (inclusive)
};

/// Error between a pose estimate and ground truth. AlongTrack mode maps
/// both poses to their nearest reference and compares cumulative
/// odometry; Euclidean mode uses planar distance directly.
LabelResult label_match(const Pose2D& pose_estimate, const Pose2D& ground_truth,
                        const Traverse& traverse, const ToleranceConfig& cfg);

/// Index of the reference pose closest (planar) to the given pose.
std::size_t nearest_reference(const Pose2D& pose, const Traverse& traverse);

/// Full single-query VPR layer for a query stream: distance vectors,
/// best matches, pose estimates, and ground-truth labels.
std::vector<MatchRecord> compute_matches(const Traverse& traverse,
                                         const QueryStream& queries,
                                         DistanceMetric metric,
                                         const ToleranceConfig& cfg);

}  // namespace vprmon
