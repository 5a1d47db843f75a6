#include "vprmon/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vprmon/errors.hpp"
#include "vprmon/featurizer.hpp"
#include "vprmon/rng.hpp"

namespace vprmon {

MatchSet compute_match_set(const Traverse& traverse, const QueryStream& queries,
                           DistanceMetric metric, const ToleranceConfig& cfg) {
    MatchSet set;
    set.matches = compute_matches(traverse, queries, metric, cfg);
    set.gt_position.reserve(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const std::size_t near = nearest_reference(queries.ground_truth[k], traverse);
        set.gt_position.push_back(traverse.odom[near]);
    }
    return set;
}

Method baseline_method() { return Method{MethodKind::Baseline, 0.0, nullptr, "baseline"}; }

Method threshold_method(double threshold, const std::string& name) {
    return Method{MethodKind::Threshold, threshold, nullptr, name};
}

Method verified_method(const MlpModel& model) {
    return Method{MethodKind::Verified, 0.0, &model, "verified"};
}

Method oracle_method() { return Method{MethodKind::Oracle, 0.0, nullptr, "oracle"}; }

std::vector<PredictionRecord> predict_stream(const Traverse& traverse,
                                             const QueryStream& queries,
                                             const MatchSet& match_set,
                                             const Method& method) {
    if (match_set.matches.size() != queries.size()) {
        throw DimensionError("match set does not cover the query stream");
    }
    std::vector<PredictionRecord> preds;
    preds.reserve(queries.size());
    switch (method.kind) {
        case MethodKind::Baseline:
            for (std::size_t k = 0; k < queries.size(); ++k) preds.push_back({1.0, 1});
            break;
        case MethodKind::Threshold:
            for (const auto& m : match_set.matches) {
                const bool ok = m.distances[m.best_index] <= method.threshold;
                preds.push_back({ok ? 1.0 : 0.0, ok ? 1 : 0});
            }
            break;
        case MethodKind::Oracle:
            for (const auto& m : match_set.matches) {
                preds.push_back({static_cast<double>(m.label), m.label});
            }
            break;
        case MethodKind::Verified: {
            if (method.model == nullptr) throw ConfigError("verified method needs a model");
            const auto& catalogue = StatCatalogue::v1();
            if (method.model->catalogue_version != catalogue.version()) {
                throw ConfigError("model was trained with catalogue version " +
                                  std::to_string(method.model->catalogue_version) +
                                  ", this build provides version " +
                                  std::to_string(catalogue.version()));
            }
            for (const auto& m : match_set.matches) {
                const auto bundle =
                    make_bundle(m, queries.features.row(m.query_index), traverse);
                const auto input = featurize(bundle, catalogue);
                preds.push_back(predict(*method.model, input));
            }
            break;
        }
    }
    return preds;
}

ErrorStats error_stats(std::vector<double> values) {
    ErrorStats stats;
    stats.count = values.size();
    if (values.empty()) return stats;
    std::sort(values.begin(), values.end());
    stats.max = values.back();
    const std::size_t n = values.size();
    stats.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    return stats;
}

Exp1Result run_exp1(const Traverse& traverse, const QueryStream& queries,
                    const MatchSet& match_set, const std::vector<PredictionRecord>& preds,
                    const Exp1Config& cfg, const ToleranceConfig& tol,
                    const std::string& method_name) {
    (void)tol;  // in/out-of-tolerance labels were fixed when the matches were computed
    if (preds.size() != queries.size() || match_set.matches.size() != queries.size()) {
        throw DimensionError("predictions and matches must cover the query stream");
    }
    if (cfg.n_starts == 0 || cfg.goal_distances.empty()) {
        throw ConfigError("exp1 needs starts and goal distances");
    }
    if (cfg.assessment_tolerance <= 0.0 || cfg.arrival_margin < 0.0) {
        throw ConfigError("exp1 tolerances must be positive");
    }

    Exp1Result result;

    const double track_end = traverse.odom.back();
    double max_goal = 0.0;
    std::vector<double> goals;
    for (double g : cfg.goal_distances) {
        if (g <= 0.0) throw ConfigError("goal distances must be > 0");
        if (g > track_end) {
            result.skipped_goals.push_back(g);  // no start can fit this goal
        } else {
            goals.push_back(g);
            max_goal = std::max(max_goal, g);
        }
    }

    // Start locations: uniform over reference indices that leave room
    // for the largest feasible goal, sampled without replacement.
    std::vector<std::size_t> valid;
    for (std::size_t s = 0; s < traverse.size(); ++s) {
        if (traverse.odom[s] + max_goal <= track_end + 1e-9) valid.push_back(s);
    }
    SeededRng rng(cfg.seed);
    rng.shuffle(valid);
    const std::size_t n_starts = std::min(cfg.n_starts, valid.size());
    std::vector<std::size_t> starts(valid.begin(), valid.begin() + n_starts);
    std::sort(starts.begin(), starts.end());

    // Single-query verdicts over the whole stream, used for metrics.
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const auto& m = match_set.matches[k];
        QueryVerdict v;
        v.query = k;
        v.acted = preds[k].binary == 1;
        v.raw = preds[k].raw;
        v.match_distance = m.distances[m.best_index];
        v.best_index = m.best_index;
        v.gt_error = m.gt_error;
        v.label = m.label;
        result.verdicts.push_back(v);
    }

    std::size_t mission_id = 0;
    for (const std::size_t start : starts) {
        for (const double goal : goals) {
            Exp1Mission mission;
            mission.mission = ++mission_id;
            mission.start_index = start;
            mission.start_position = traverse.odom[start];
            mission.goal_distance = goal;
            mission.goal_position = mission.start_position + goal;

            // Replay the stream from the start location. The estimate
            // stream drives arrival; ground truth only scores it.
            std::size_t k0 = 0;
            while (k0 < queries.size() &&
                   match_set.gt_position[k0] < mission.start_position - 1e-9) {
                ++k0;
            }
            for (std::size_t k = k0; k < queries.size(); ++k) {
                if (preds[k].binary != 1) continue;
                const auto& m = match_set.matches[k];
                const double est_pos = traverse.odom[m.best_index];
                if (est_pos >= mission.goal_position - cfg.arrival_margin) {
                    mission.arrived = true;
                    mission.arrival_query = k + 1;
                    mission.goal_error =
                        std::fabs(match_set.gt_position[k] - mission.goal_position);
                    mission.complete = mission.goal_error <= cfg.assessment_tolerance;
                    break;
                }
            }
            if (!mission.arrived) {
                mission.goal_error =
                    std::fabs(match_set.gt_position.back() - mission.goal_position);
                mission.complete = false;
            }
            result.missions.push_back(mission);
        }
    }

    result.metrics = compute_exp1_metrics(result.missions, result.verdicts, method_name);
    return result;
}

const char* to_string(QueryStatus status) {
    switch (status) {
        case QueryStatus::Warmup: return "warmup";
        case QueryStatus::Declined: return "declined";
        case QueryStatus::Estimate: return "estimate";
    }
    return "unknown";
}

QueryStatus query_status_from_string(const std::string& s) {
    if (s == "warmup") return QueryStatus::Warmup;
    if (s == "declined") return QueryStatus::Declined;
    if (s == "estimate") return QueryStatus::Estimate;
    throw ConfigError("unknown query status: " + s);
}

Exp2Result run_exp2(const Traverse& traverse, const QueryStream& queries,
                    const MatchSet& match_set, const std::vector<PredictionRecord>& preds,
                    bool verified_mode, const Exp2Config& cfg, const ToleranceConfig& tol,
                    const std::string& method_name) {
    if (preds.size() != queries.size() || match_set.matches.size() != queries.size()) {
        throw DimensionError("predictions and matches must cover the query stream");
    }
    if (cfg.window_d <= 0.0) throw ConfigError("window_d must be > 0");
    const double warmup = cfg.warmup < 0.0 ? cfg.window_d : cfg.warmup;

    Exp2Result result;
    result.records.reserve(queries.size());
    HistoryWindow window;
    window.window_d = cfg.window_d;
    const double start_odo = queries.odometer.front();

    for (std::size_t k = 0; k < queries.size(); ++k) {
        const auto& m = match_set.matches[k];
        HistoryEntry entry;
        entry.match_index = m.best_index;
        entry.match_distance = m.distances[m.best_index];
        entry.odometer = queries.odometer[k];
        entry.prediction = preds[k].binary;
        entry.pose = m.pose_estimate;
        window = update_history(std::move(window), entry);

        Exp2QueryRecord rec;
        rec.query = k;
        rec.prediction = preds[k].binary;
        rec.match_distance = entry.match_distance;
        rec.best_index = m.best_index;

        if (queries.odometer[k] - start_odo < warmup) {
            rec.status = QueryStatus::Warmup;
        } else {
            const auto loc = hoq_localize(window, queries.odometer[k], traverse, verified_mode);
            if (loc.status == LocalizationResult::Status::Declined) {
                rec.status = QueryStatus::Declined;
            } else {
                rec.status = QueryStatus::Estimate;
                rec.ref_index = loc.ref_index;
                rec.error = tol.mode == DistanceMode::AlongTrack
                                ? std::fabs(traverse.odom[loc.ref_index] -
                                            match_set.gt_position[k])
                                : planar_distance(loc.pose, queries.ground_truth[k]);
                rec.in_tolerance = rec.error <= tol.tolerance ? 1 : 0;
            }
        }
        result.records.push_back(rec);
    }

    result.metrics = compute_exp2_metrics(result.records, method_name);
    return result;
}

namespace {

struct LabeledDistance {
    double distance = 0.0;
    int label = 0;
};

struct SweepPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

std::vector<SweepPoint> threshold_sweep(const std::vector<MatchRecord>& matches) {
    if (matches.empty()) throw ConfigError("calibration needs a non-empty match set");
    std::vector<LabeledDistance> data;
    data.reserve(matches.size());
    std::size_t positives = 0;
    for (const auto& m : matches) {
        data.push_back({m.distances[m.best_index], m.label});
        positives += static_cast<std::size_t>(m.label);
    }
    if (positives == 0 || positives == data.size()) {
        throw ConfigError("calibration needs both classes in the training matches");
    }
    std::sort(data.begin(), data.end(),
              [](const LabeledDistance& a, const LabeledDistance& b) {
                  return a.distance < b.distance;
              });
    std::vector<SweepPoint> sweep;
    std::size_t accepted = 0;
    std::size_t accepted_pos = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ++accepted;
        accepted_pos += static_cast<std::size_t>(data[i].label);
        // Candidate thresholds are the unique distances; emit at the
        // last occurrence of each value.
        if (i + 1 < data.size() && data[i + 1].distance == data[i].distance) continue;
        SweepPoint pt;
        pt.threshold = data[i].distance;
        pt.precision = static_cast<double>(accepted_pos) / static_cast<double>(accepted);
        pt.recall = static_cast<double>(accepted_pos) / static_cast<double>(positives);
        sweep.push_back(pt);
    }
    return sweep;
}

}  // namespace

ThresholdBaseline calibrate_threshold(const std::vector<MatchRecord>& training_matches,
                                      ThresholdBaseline::Kind kind, double target) {
    if (!(target >= 0.0 && target <= 1.0)) {
        throw ConfigError("calibration target must be a fraction in [0, 1]");
    }
    const auto sweep = threshold_sweep(training_matches);
    ThresholdBaseline out;
    out.kind = kind;
    out.target = target;

    const SweepPoint* chosen = nullptr;
    if (kind == ThresholdBaseline::Kind::Precision) {
        // Largest threshold with precision >= target; recall grows with
        // the threshold, so this maximizes recall subject to precision.
        for (const auto& pt : sweep) {
            if (pt.precision >= target) chosen = &pt;
        }
        if (chosen == nullptr) {
            out.attainable = false;
            for (const auto& pt : sweep) {
                if (chosen == nullptr || pt.precision >= chosen->precision) chosen = &pt;
            }
        }
    } else {
        for (const auto& pt : sweep) {
            if (pt.recall >= target) {
                chosen = &pt;
                break;
            }
        }
        if (chosen == nullptr) {
            out.attainable = false;
            chosen = &sweep.back();  // recall is maximal at the largest threshold
        }
    }
    out.threshold = chosen->threshold;
    out.achieved_precision = chosen->precision;
    out.achieved_recall = chosen->recall;
    return out;
}

std::vector<OperatingPoint> reference_operating_points() {
    return {
        {"apgem", 0.916, 0.213},
        {"netvlad", 0.882, 0.293},
        {"salad", 0.986, 0.636},
    };
}

MetricsReport compute_exp1_metrics(const std::vector<Exp1Mission>& missions,
                                   const std::vector<QueryVerdict>& verdicts,
                                   const std::string& method_name) {
    if (missions.empty() || verdicts.empty()) {
        throw ConfigError("cannot compute metrics over an empty record set");
    }
    MetricsReport report;
    report.experiment = "exp1";
    report.method = method_name;
    report.has_missions = true;
    report.missions_total = missions.size();
    std::vector<double> goal_errors;
    for (const auto& m : missions) {
        if (m.complete) ++report.missions_complete;
        goal_errors.push_back(m.goal_error);
    }
    report.mission_completion = static_cast<double>(report.missions_complete) /
                                static_cast<double>(report.missions_total);
    report.goal_error = error_stats(std::move(goal_errors));

    std::size_t tp = 0;
    std::vector<double> acted_errors;
    for (const auto& v : verdicts) {
        if (v.acted) {
            report.emitted += 1;
            acted_errors.push_back(v.gt_error);
            if (v.label == 1) ++tp;
        } else {
            report.declined += 1;
        }
    }
    report.opportunities = verdicts.size();
    report.localization_error = error_stats(std::move(acted_errors));
    report.precision =
        report.emitted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(report.emitted);
    report.recall = static_cast<double>(tp) / static_cast<double>(report.opportunities);
    return report;
}

MetricsReport compute_exp2_metrics(const std::vector<Exp2QueryRecord>& records,
                                   const std::string& method_name) {
    if (records.empty()) throw ConfigError("cannot compute metrics over an empty record set");
    MetricsReport report;
    report.experiment = "exp2";
    report.method = method_name;
    std::size_t tp = 0;
    std::vector<double> errors;
    for (const auto& r : records) {
        switch (r.status) {
            case QueryStatus::Warmup:
                break;
            case QueryStatus::Declined:
                report.declined += 1;
                report.opportunities += 1;
                break;
            case QueryStatus::Estimate:
                report.emitted += 1;
                report.opportunities += 1;
                errors.push_back(r.error);
                if (r.in_tolerance == 1) ++tp;
                break;
        }
    }
    report.localization_error = error_stats(std::move(errors));
    report.precision =
        report.emitted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(report.emitted);
    report.recall = report.opportunities == 0
                        ? 0.0
                        : static_cast<double>(tp) / static_cast<double>(report.opportunities);
    return report;
}

MetricsReport compute_verify_metrics(const std::vector<QueryVerdict>& verdicts,
                                     const std::string& method_name) {
    if (verdicts.empty()) throw ConfigError("cannot compute metrics over an empty record set");
    MetricsReport report;
    report.experiment = "verify";
    report.method = method_name;
    std::size_t tp = 0;
    std::vector<double> errors;
    for (const auto& v : verdicts) {
        if (v.acted) {
            report.emitted += 1;
            errors.push_back(v.gt_error);
            if (v.label == 1) ++tp;
        } else {
            report.declined += 1;
        }
    }
    report.opportunities = verdicts.size();
    report.localization_error = error_stats(std::move(errors));
    report.precision =
        report.emitted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(report.emitted);
    report.recall = static_cast<double>(tp) / static_cast<double>(report.opportunities);
    return report;
}

}  // namespace vprmon
