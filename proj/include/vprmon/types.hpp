#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vprmon/pose.hpp"

namespace vprmon {

/// Row-major matrix of 32-bit feature payloads. Internal math upcasts
/// to double; storage stays f32 to match the on-disk format.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t dim)
        : rows_(rows), dim_(dim), data_(rows * dim, 0.0F) {}

    std::size_t rows() const { return rows_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return rows_ == 0; }

    std::span<const float> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

/// Ordered reference map: one pose, cumulative odometry value, and
/// feature vector per reference image.
struct Traverse {
    std::vector<Pose2D> poses;
    std::vector<double> odom;  // cumulative along-track meters, odom[0] == 0
    FeatureMatrix features;
    std::string label;

    std::size_t size() const { return poses.size(); }
};

/// Ordered query set with ground truth and odometer readings.
struct QueryStream {
    std::vector<Pose2D> ground_truth;
    std::vector<double> odometer;
    FeatureMatrix features;
    double rate_hint_hz = 0.0;  // informational only

    std::size_t size() const { return ground_truth.size(); }
};

enum class DistanceMode { AlongTrack, Euclidean };

struct ToleranceConfig {
    double tolerance = 0.5;  // meters
    DistanceMode mode = DistanceMode::AlongTrack;
};

/// One query's VPR outcome.
struct MatchRecord {
    std::size_t query_index = 0;     // 0-based in memory; reports are 1-based
    std::vector<double> distances;   // match distance to every reference
    std::size_t best_index = 0;      // argmin of distances, first occurrence
    Pose2D pose_estimate;
    double gt_error = 0.0;           // meters
    int label = 0;                   // 1 in-tolerance, 0 out-of-tolerance
};

/// Cumulative along-track distance derived from consecutive pose gaps.
std::vector<double> derive_odom(const std::vector<Pose2D>& poses);

/// Throws LoadError/ConfigError if the traverse breaks an invariant.
void validate_traverse(const Traverse& t);

/// Throws if entry counts disagree or the feature dimension does not
/// match `expected_dim` (pass 0 to skip the dimension check).
void validate_query_stream(const QueryStream& q, std::size_t expected_dim);

const char* to_string(DistanceMode mode);
DistanceMode distance_mode_from_string(const std::string& s);

}  // namespace vprmon
