#include "vprmon/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vprmon/errors.hpp"

namespace vprmon {

HistoryWindow update_history(HistoryWindow window, HistoryEntry entry) {
    if (window.window_d < 0.0) throw ConfigError("window_d must be >= 0");
    if (!window.entries.empty() && entry.odometer < window.entries.back().odometer) {
        throw ConfigError("odometer regression: " + std::to_string(entry.odometer) +
                          " after " + std::to_string(window.entries.back().odometer));
    }
    window.entries.push_back(entry);
    const double current = entry.odometer;
    auto first_kept = std::find_if(window.entries.begin(), window.entries.end(),
                                   [&](const HistoryEntry& e) {
                                       return current - e.odometer <= window.window_d;
                                   });
    window.entries.erase(window.entries.begin(), first_kept);
    return window;
}

HoqChoice hoq_best(const HistoryWindow& window, bool verified) {
    const auto& entries = window.entries;
    if (entries.empty()) throw ConfigError("hoq_best on empty history");
    if (!verified) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].match_distance < entries[best].match_distance) best = i;
        }
        return HoqChoice{false, best};
    }
    double max_d = entries[0].match_distance;
    for (const auto& e : entries) max_d = std::max(max_d, e.match_distance);
    const double sentinel = 1.0 + max_d;
    std::size_t best = 0;
    double best_d = entries[0].prediction == 1 ? entries[0].match_distance : sentinel;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const double d = entries[i].prediction == 1 ? entries[i].match_distance : sentinel;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (best_d > max_d) return HoqChoice{true, 0};
    return HoqChoice{false, best};
}

LocalizationResult hoq_localize(const HistoryWindow& window, double current_odometer,
                                const Traverse& traverse, bool verified) {
    const HoqChoice choice = hoq_best(window, verified);
    LocalizationResult result;
    result.verified = verified;
    if (choice.declined) {
        result.status = LocalizationResult::Status::Declined;
        return result;
    }
    const HistoryEntry& chosen = window.entries[choice.entry_pos];
    const std::size_t b = chosen.match_index;
    if (b >= traverse.size()) {
        throw ConfigError("history match index " + std::to_string(b + 1) +
                          " outside traverse of size " + std::to_string(traverse.size()));
    }
    const double delta = std::fabs(current_odometer - chosen.odometer);

    // Running sum of along-track gaps from reference b; first occurrence
    // of the minimum |delta - S| wins.
    double running = 0.0;
    double best_cost = std::fabs(delta);
    std::size_t q = b;
    for (std::size_t j = b + 1; j < traverse.size(); ++j) {
        running += planar_distance(traverse.poses[j - 1], traverse.poses[j]);
        const double cost = std::fabs(delta - running);
        if (cost < best_cost) {
            best_cost = cost;
            q = j;
        }
    }
    result.status = LocalizationResult::Status::Estimate;
    result.ref_index = q;
    result.pose = traverse.poses[q];
    result.history_pos = choice.entry_pos;
    result.delta = delta;
    return result;
}

VerifiedEstimate verify_single(const MatchRecord& match, const PredictionRecord& prediction) {
    if (prediction.binary != 1) return VerifiedEstimate{false, 0, Pose2D{}};
    return VerifiedEstimate{true, match.best_index, match.pose_estimate};
}

}  // namespace vprmon
