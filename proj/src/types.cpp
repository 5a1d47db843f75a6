#include "vprmon/types.hpp"

#include <cmath>
#include <string>

#include "vprmon/errors.hpp"

namespace vprmon {

std::vector<double> derive_odom(const std::vector<Pose2D>& poses) {
    std::vector<double> odom(poses.size(), 0.0);
    for (std::size_t i = 1; i < poses.size(); ++i) {
        odom[i] = odom[i - 1] + planar_distance(poses[i - 1], poses[i]);
    }
    return odom;
}

void validate_traverse(const Traverse& t) {
    const std::size_t n = t.poses.size();
    if (n < 2) {
        throw LoadError("traverse needs at least 2 references, got " + std::to_string(n));
    }
    if (t.odom.size() != n) {
        throw LoadError("traverse has " + std::to_string(n) + " poses but " +
                        std::to_string(t.odom.size()) + " odometry values");
    }
    if (t.features.rows() != n) {
        throw LoadError("traverse has " + std::to_string(n) + " poses but " +
                        std::to_string(t.features.rows()) + " feature rows");
    }
    if (t.features.dim() < 1) {
        throw LoadError("traverse feature dimension must be >= 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Pose2D& p = t.poses[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta)) {
            throw LoadError("non-finite pose at row " + std::to_string(i + 1));
        }
        if (!std::isfinite(t.odom[i])) {
            throw LoadError("non-finite odometry at row " + std::to_string(i + 1));
        }
        if (i > 0 && t.odom[i] < t.odom[i - 1]) {
            throw LoadError("non-monotone odometry at row " + std::to_string(i + 1));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (float v : t.features.row(i)) {
            if (!std::isfinite(v)) {
                throw LoadError("non-finite feature at row " + std::to_string(i + 1));
            }
        }
    }
}

void validate_query_stream(const QueryStream& q, std::size_t expected_dim) {
    const std::size_t n = q.ground_truth.size();
    if (n == 0) throw LoadError("query stream is empty");
    if (q.odometer.size() != n) {
        throw LoadError("query stream has " + std::to_string(n) + " poses but " +
                        std::to_string(q.odometer.size()) + " odometer values");
    }
    if (q.features.rows() != n) {
        throw LoadError("query stream has " + std::to_string(n) + " poses but " +
                        std::to_string(q.features.rows()) + " feature rows");
    }
    if (expected_dim != 0 && q.features.dim() != expected_dim) {
        throw DimensionError("query feature dimension " + std::to_string(q.features.dim()) +
                             " does not match reference dimension " +
                             std::to_string(expected_dim));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(q.odometer[i])) {
            throw LoadError("non-finite odometer at row " + std::to_string(i + 1));
        }
        if (i > 0 && q.odometer[i] < q.odometer[i - 1]) {
            throw LoadError("non-monotone odometer at row " + std::to_string(i + 1));
        }
    }
}

const char* to_string(DistanceMode mode) {
    return mode == DistanceMode::AlongTrack ? "along-track" : "euclidean";
}

DistanceMode distance_mode_from_string(const std::string& s) {
    if (s == "along-track" || s == "alongtrack") return DistanceMode::AlongTrack;
    if (s == "euclidean") return DistanceMode::Euclidean;
    throw ConfigError("unknown distance mode: " + s);
}

}  // namespace vprmon
