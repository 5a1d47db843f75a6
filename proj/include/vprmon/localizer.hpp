#pragma once

#include <cstddef>
#include <vector>

#include "vprmon/mlp.hpp"
#include "vprmon/types.hpp"

namespace vprmon {

/// One sampled VPR outcome retained in the rolling history.
struct HistoryEntry {
    std::size_t match_index = 0;  // reference index of the match
    double match_distance = 0.0;  // best-match distance scalar
    double odometer = 0.0;        // odometer reading when sampled
    int prediction = 0;           // integrity prediction, 1 in-tolerance
    Pose2D pose;                  // pose of the matched reference
};

/// Rolling buffer over the previous window_d meters of travel.
/// Entries are kept while current_odometer - entry.odometer <= window_d
/// (inclusive boundary).
struct HistoryWindow {
    std::vector<HistoryEntry> entries;
    double window_d = 1.5;
};

/// Appends an entry and evicts everything older than window_d meters.
/// Pure: returns the updated window. Throws on odometer regression.
HistoryWindow update_history(HistoryWindow window, HistoryEntry entry);

struct HoqChoice {
    bool declined = false;
    std::size_t entry_pos = 0;  // position within the window
};

/// Unverified: lowest match distance wins (first occurrence on ties).
/// Verified: predicted out-of-tolerance entries are masked to
/// 1 + max(distances); if even the winner exceeds max(distances) every
/// entry was masked and the system declines. Throws on empty history,
/// which is an error distinct from declining.
HoqChoice hoq_best(const HistoryWindow& window, bool verified);

struct LocalizationResult {
    enum class Status { Estimate, Declined };
    Status status = Status::Declined;
    std::size_t ref_index = 0;   // q: extrapolated reference index
    Pose2D pose;                 // pose of reference q
    std::size_t history_pos = 0; // chosen history entry (b or b-hat)
    double delta = 0.0;          // odometer travel since the chosen entry
    bool verified = false;
};

/// Extrapolates forward from the best (verified) historical match by
/// the odometer distance traveled since it was recorded, walking the
/// reference traverse's along-track gaps. The search is clamped to the
/// traverse end: if delta exceeds the remaining track the final
/// reference wins the argmin.
LocalizationResult hoq_localize(const HistoryWindow& window, double current_odometer,
                                const Traverse& traverse, bool verified);

struct VerifiedEstimate {
    bool accepted = false;
    std::size_t ref_index = 0;
    Pose2D pose;
};

/// Single-query verification: the pose estimate is kept iff the
/// integrity prediction is 1.
VerifiedEstimate verify_single(const MatchRecord& match, const PredictionRecord& prediction);

}  // namespace vprmon
