#pragma once

#include <cmath>

#include "vprmon/errors.hpp"

namespace vprmon {

/// Planar pose. theta is kept normalized to (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// Wrap an angle into (-pi, pi].
inline double normalize_angle(double theta) {
    constexpr double pi = 3.141592653589793238462643383279502884;
    double t = std::fmod(theta + pi, 2.0 * pi);
    if (t <= 0.0) t += 2.0 * pi;
    return t - pi;
}

inline Pose2D make_pose(double x, double y, double theta) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta)) {
        throw ConfigError("pose components must be finite");
    }
    return Pose2D{x, y, normalize_angle(theta)};
}

/// Euclidean distance in the plane (heading ignored).
inline double planar_distance(const Pose2D& a, const Pose2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace vprmon
