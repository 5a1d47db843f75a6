#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vprmon/localizer.hpp"
#include "vprmon/matcher.hpp"
#include "vprmon/mlp.hpp"
#include "vprmon/types.hpp"

namespace vprmon {

/// Matches for a whole query stream plus each query's ground-truth
/// along-track position on the reference traverse.
struct MatchSet {
    std::vector<MatchRecord> matches;
    std::vector<double> gt_position;
};

MatchSet compute_match_set(const Traverse& traverse, const QueryStream& queries,
                           DistanceMetric metric, const ToleranceConfig& cfg);

enum class MethodKind { Baseline, Threshold, Verified, Oracle };

/// A verification method applied to the raw VPR output stream.
///  - Baseline accepts everything.
///  - Threshold accepts matches with distance <= threshold (N_P / N_R).
///  - Verified consults the trained integrity monitor.
///  - Oracle uses ground-truth labels; it bounds what any monitor can do.
struct Method {
    MethodKind kind = MethodKind::Baseline;
    double threshold = 0.0;
    const MlpModel* model = nullptr;
    std::string name = "baseline";
};

Method baseline_method();
Method threshold_method(double threshold, const std::string& name);
Method verified_method(const MlpModel& model);
Method oracle_method();

/// Integrity predictions for every query under the given method.
std::vector<PredictionRecord> predict_stream(const Traverse& traverse,
                                             const QueryStream& queries,
                                             const MatchSet& match_set,
                                             const Method& method);

struct ErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

ErrorStats error_stats(std::vector<double> values);

struct MetricsReport {
    std::string experiment;
    std::string method;
    bool has_missions = false;
    double mission_completion = 0.0;
    std::size_t missions_total = 0;
    std::size_t missions_complete = 0;
    ErrorStats goal_error;
    ErrorStats localization_error;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t declined = 0;
    std::size_t emitted = 0;
    std::size_t opportunities = 0;
};

// ---------------------------------------------------------------------------
// Experiment 1: goal-zone missions with single-query verification.

struct Exp1Config {
    std::size_t n_starts = 50;
    std::vector<double> goal_distances = {5.0, 10.0, 25.0, 50.0};
    double assessment_tolerance = 0.5;  // mission passes within this of the goal
    double arrival_margin = 0.10;       // flag arrival this far before the goal
    std::uint64_t seed = 0;
};

struct Exp1Mission {
    std::size_t mission = 0;       // 1-based
    std::size_t start_index = 0;   // reference index, 0-based in memory
    double start_position = 0.0;   // along-track meters
    double goal_distance = 0.0;
    double goal_position = 0.0;
    bool arrived = false;
    std::size_t arrival_query = 0;  // 1-based; 0 when the stream ran out
    bool complete = false;
    double goal_error = 0.0;
};

/// Per-query accept decision and ground truth, shared by Experiment 1
/// metrics and the standalone single-query verification report.
struct QueryVerdict {
    std::size_t query = 0;  // 0-based in memory
    bool acted = false;
    double raw = 1.0;
    double match_distance = 0.0;
    std::size_t best_index = 0;
    double gt_error = 0.0;
    int label = 0;
};

struct Exp1Result {
    std::vector<Exp1Mission> missions;
    std::vector<QueryVerdict> verdicts;
    std::vector<double> skipped_goals;  // goal distances beyond the traverse
    MetricsReport metrics;
};

Exp1Result run_exp1(const Traverse& traverse, const QueryStream& queries,
                    const MatchSet& match_set, const std::vector<PredictionRecord>& preds,
                    const Exp1Config& cfg, const ToleranceConfig& tol,
                    const std::string& method_name);

// ---------------------------------------------------------------------------
// Experiment 2: continuous localization with the history-of-queries method.

struct Exp2Config {
    double window_d = 1.5;  // meters of history
    double warmup = -1.0;   // meters before the first estimate; <0 means window_d
};

enum class QueryStatus { Warmup, Declined, Estimate };

const char* to_string(QueryStatus status);
QueryStatus query_status_from_string(const std::string& s);

struct Exp2QueryRecord {
    std::size_t query = 0;  // 0-based in memory
    QueryStatus status = QueryStatus::Warmup;
    int prediction = 0;
    double match_distance = 0.0;
    std::size_t best_index = 0;
    std::size_t ref_index = 0;  // extrapolated reference, valid for Estimate
    double error = 0.0;         // valid for Estimate
    int in_tolerance = 0;
};

struct Exp2Result {
    std::vector<Exp2QueryRecord> records;
    MetricsReport metrics;
};

Exp2Result run_exp2(const Traverse& traverse, const QueryStream& queries,
                    const MatchSet& match_set, const std::vector<PredictionRecord>& preds,
                    bool verified_mode, const Exp2Config& cfg, const ToleranceConfig& tol,
                    const std::string& method_name);

// ---------------------------------------------------------------------------
// Naive match-distance thresholds and metrics.

struct ThresholdBaseline {
    enum class Kind { Precision, Recall };  // N_P / N_R
    Kind kind = Kind::Precision;
    double target = 0.0;
    double threshold = 0.0;
    double achieved_precision = 0.0;
    double achieved_recall = 0.0;
    bool attainable = true;
};

/// Sweeps the sorted unique match distances of the training set.
/// Kind::Precision returns the largest threshold whose precision meets
/// the target (maximizing recall subject to precision); Kind::Recall
/// returns the smallest threshold whose recall meets the target. An
/// unattainable target yields the closest attainable operating point
/// with attainable = false.
ThresholdBaseline calibrate_threshold(const std::vector<MatchRecord>& training_matches,
                                      ThresholdBaseline::Kind kind, double target);

/// Training operating points kept as configuration fixtures for the
/// three reference VPR techniques.
struct OperatingPoint {
    std::string technique;
    double precision = 0.0;
    double recall = 0.0;
};

std::vector<OperatingPoint> reference_operating_points();

/// Metrics recomputation from per-record data; all throw on empty input.
MetricsReport compute_exp1_metrics(const std::vector<Exp1Mission>& missions,
                                   const std::vector<QueryVerdict>& verdicts,
                                   const std::string& method_name);
MetricsReport compute_exp2_metrics(const std::vector<Exp2QueryRecord>& records,
                                   const std::string& method_name);
MetricsReport compute_verify_metrics(const std::vector<QueryVerdict>& verdicts,
                                     const std::string& method_name);

}  // namespace vprmon
