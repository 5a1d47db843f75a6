#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vprmon/dataset_io.hpp"
#include "vprmon/experiments.hpp"
#include "vprmon/featurizer.hpp"
#include "vprmon/localizer.hpp"
#include "vprmon/matcher.hpp"
#include "vprmon/mlp.hpp"
#include "vprmon/model_io.hpp"
#include "vprmon/synthetic.hpp"

namespace py = pybind11;
using namespace vprmon;

namespace {

std::vector<float> row_copy(const FeatureMatrix& m, std::size_t i) {
    if (i >= m.rows()) throw py::index_error();
    const auto r = m.row(i);
    return {r.begin(), r.end()};
}

std::vector<double> stats_list(const std::vector<double>& v) {
    const auto out = extract_stats(std::span<const double>(v));
    return {out.begin(), out.end()};
}

std::vector<double> featurize_list(const FeatureBundle& bundle) {
    const auto out = featurize(bundle);
    return {out.begin(), out.end()};
}

Method make_method(const std::string& name, const MlpModel* model, double threshold) {
    if (name == "baseline") return baseline_method();
    if (name == "oracle") return oracle_method();
    if (name == "verified") {
        if (model == nullptr) throw ConfigError("verified method needs a model");
        return verified_method(*model);
    }
    if (name == "np" || name == "nr") return threshold_method(threshold, name);
    throw ConfigError("unknown method: " + name);
}

}  // namespace

PYBIND11_MODULE(_vprmon, m) {
    m.doc() = "VPR integrity monitoring core";

    py::register_exception<Error>(m, "VprError");

    py::class_<Pose2D>(m, "Pose2D")
        .def(py::init<>())
        .def(py::init(&make_pose), py::arg("x"), py::arg("y"), py::arg("theta"))
        .def_readwrite("x", &Pose2D::x)
        .def_readwrite("y", &Pose2D::y)
        .def_readwrite("theta", &Pose2D::theta);

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def_property_readonly("rows", &FeatureMatrix::rows)
        .def_property_readonly("dim", &FeatureMatrix::dim)
        .def("row", &row_copy);

    py::class_<Traverse>(m, "Traverse")
        .def_readonly("poses", &Traverse::poses)
        .def_readonly("odom", &Traverse::odom)
        .def_readonly("features", &Traverse::features)
        .def_readonly("label", &Traverse::label)
        .def("__len__", &Traverse::size);

    py::class_<QueryStream>(m, "QueryStream")
        .def_readonly("ground_truth", &QueryStream::ground_truth)
        .def_readonly("odometer", &QueryStream::odometer)
        .def_readonly("features", &QueryStream::features)
        .def_readonly("rate_hint_hz", &QueryStream::rate_hint_hz)
        .def("__len__", &QueryStream::size);

    py::enum_<DistanceMode>(m, "DistanceMode")
        .value("AlongTrack", DistanceMode::AlongTrack)
        .value("Euclidean", DistanceMode::Euclidean);

    py::class_<ToleranceConfig>(m, "ToleranceConfig")
        .def(py::init<>())
        .def(py::init([](double tolerance, DistanceMode mode) {
                 return ToleranceConfig{tolerance, mode};
             }),
             py::arg("tolerance"), py::arg("mode") = DistanceMode::AlongTrack)
        .def_readwrite("tolerance", &ToleranceConfig::tolerance)
        .def_readwrite("mode", &ToleranceConfig::mode);

    py::enum_<DistanceMetric>(m, "DistanceMetric")
        .value("Euclidean", DistanceMetric::Euclidean)
        .value("Cosine", DistanceMetric::Cosine);

    py::class_<MatchRecord>(m, "MatchRecord")
        .def_readonly("query_index", &MatchRecord::query_index)
        .def_readonly("distances", &MatchRecord::distances)
        .def_readonly("best_index", &MatchRecord::best_index)
        .def_readonly("pose_estimate", &MatchRecord::pose_estimate)
        .def_readonly("gt_error", &MatchRecord::gt_error)
        .def_readonly("label", &MatchRecord::label);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n", &SynthConfig::n)
        .def_readwrite("m", &SynthConfig::m)
        .def_readwrite("spacing", &SynthConfig::spacing)
        .def_readwrite("aliasing_rate", &SynthConfig::aliasing_rate)
        .def_readwrite("noise_sigma", &SynthConfig::noise_sigma)
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("label", &SynthConfig::label)
        .def_readwrite("rate_hint_hz", &SynthConfig::rate_hint_hz);

    py::class_<ProvenanceRecord>(m, "ProvenanceRecord")
        .def_readonly("query_index", &ProvenanceRecord::query_index)
        .def_readonly("true_ref", &ProvenanceRecord::true_ref)
        .def_readonly("aliased", &ProvenanceRecord::aliased)
        .def_readonly("source_ref", &ProvenanceRecord::source_ref);

    py::class_<SyntheticDataset>(m, "SyntheticDataset")
        .def_readonly("traverse", &SyntheticDataset::traverse)
        .def_readonly("queries", &SyntheticDataset::queries)
        .def_readonly("provenance", &SyntheticDataset::provenance);

    m.def("generate_synthetic", &generate_synthetic, py::arg("config"));
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("directory"));
    m.def(
        "load_traverse",
        [](const std::filesystem::path& dir) { return load_traverse(dir); },
        py::arg("directory"));
    m.def(
        "load_query_stream",
        [](const std::filesystem::path& dir) { return load_query_stream(dir); },
        py::arg("directory"));

    m.def(
        "distance_vector",
        [](const std::vector<float>& query, const Traverse& traverse, DistanceMetric metric) {
            return distance_vector(std::span<const float>(query), traverse, metric);
        },
        py::arg("query_feature"), py::arg("traverse"),
        py::arg("metric") = DistanceMetric::Euclidean);
    m.def(
        "best_match",
        [](const std::vector<double>& distances) {
            return best_match(std::span<const double>(distances));
        },
        py::arg("distances"));
    m.def(
        "label_match",
        [](const Pose2D& estimate, const Pose2D& truth, const Traverse& traverse,
           const ToleranceConfig& cfg) {
            const auto r = label_match(estimate, truth, traverse, cfg);
            return py::make_tuple(r.gt_error, r.label);
        },
        py::arg("pose_estimate"), py::arg("ground_truth"), py::arg("traverse"), py::arg("cfg"));
    m.def("compute_matches", &compute_matches, py::arg("traverse"), py::arg("queries"),
          py::arg("metric"), py::arg("cfg"));

    m.def("catalogue_version", [] { return StatCatalogue::v1().version(); });
    m.def("catalogue_names", [] {
        std::vector<std::string> names;
        for (const auto& def : StatCatalogue::v1().defs()) names.emplace_back(def.name);
        return names;
    });
    m.def("extract_stats", &stats_list, py::arg("values"));

    py::class_<FeatureBundle>(m, "FeatureBundle")
        .def(py::init(&FeatureBundle::make), py::arg("d"), py::arg("q"), py::arg("r"))
        .def_readonly("d", &FeatureBundle::d)
        .def_readonly("q", &FeatureBundle::q)
        .def_readonly("r", &FeatureBundle::r)
        .def_readonly("v", &FeatureBundle::v);
    m.def("featurize", &featurize_list, py::arg("bundle"));

    m.def(
        "weighted_mse",
        [](const std::vector<int>& labels, const std::vector<double>& preds, double alpha) {
            return weighted_mse(std::span<const int>(labels), std::span<const double>(preds),
                                alpha);
        },
        py::arg("labels"), py::arg("predictions"), py::arg("alpha"));
    m.def("choose_alpha_default", &choose_alpha_default, py::arg("out_of_tolerance_fraction"));

    py::enum_<Optimizer>(m, "Optimizer")
        .value("Sgd", Optimizer::Sgd)
        .value("Adam", Optimizer::Adam);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("dropout", &TrainConfig::dropout)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def_readwrite("hidden_layers", &TrainConfig::hidden_layers)
        .def_readwrite("hidden_units", &TrainConfig::hidden_units)
        .def_readwrite("threshold", &TrainConfig::threshold)
        .def_readwrite("plateau_window", &TrainConfig::plateau_window)
        .def_readwrite("plateau_rel_improvement", &TrainConfig::plateau_rel_improvement);

    py::class_<TrainEpoch>(m, "TrainEpoch")
        .def_readonly("epoch", &TrainEpoch::epoch)
        .def_readonly("loss", &TrainEpoch::loss)
        .def_readonly("precision", &TrainEpoch::precision)
        .def_readonly("recall", &TrainEpoch::recall);

    py::class_<MlpModel>(m, "MlpModel")
        .def_property_readonly("input_dim", &MlpModel::input_dim)
        .def_property_readonly("hidden_count", &MlpModel::hidden_count)
        .def_readonly("threshold", &MlpModel::threshold)
        .def_readonly("catalogue_version", &MlpModel::catalogue_version)
        .def_readonly("alpha_used", &MlpModel::alpha_used);

    py::class_<PredictionRecord>(m, "PredictionRecord")
        .def_readonly("raw", &PredictionRecord::raw)
        .def_readonly("binary", &PredictionRecord::binary);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("log", &TrainResult::log);

    m.def("train", &train, py::arg("dataset"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "forward",
        [](const MlpModel& model, const std::vector<double>& x) {
            return forward(model, std::span<const double>(x));
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "predict",
        [](const MlpModel& model, const std::vector<double>& x) {
            return predict(model, std::span<const double>(x));
        },
        py::arg("model"), py::arg("x"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<HistoryEntry>(m, "HistoryEntry")
        .def(py::init([](std::size_t match_index, double match_distance, double odometer,
                         int prediction, const Pose2D& pose) {
                 return HistoryEntry{match_index, match_distance, odometer, prediction, pose};
             }),
             py::arg("match_index"), py::arg("match_distance"), py::arg("odometer"),
             py::arg("prediction"), py::arg("pose") = Pose2D{})
        .def_readwrite("match_index", &HistoryEntry::match_index)
        .def_readwrite("match_distance", &HistoryEntry::match_distance)
        .def_readwrite("odometer", &HistoryEntry::odometer)
        .def_readwrite("prediction", &HistoryEntry::prediction);

    py::class_<HistoryWindow>(m, "HistoryWindow")
        .def(py::init([](double window_d) {
                 HistoryWindow w;
                 w.window_d = window_d;
                 return w;
             }),
             py::arg("window_d") = 1.5)
        .def_readonly("entries", &HistoryWindow::entries)
        .def_readwrite("window_d", &HistoryWindow::window_d);

    m.def("update_history", &update_history, py::arg("window"), py::arg("entry"));

    py::class_<LocalizationResult> loc(m, "LocalizationResult");
    py::enum_<LocalizationResult::Status>(loc, "Status")
        .value("Estimate", LocalizationResult::Status::Estimate)
        .value("Declined", LocalizationResult::Status::Declined);
    loc.def_readonly("status", &LocalizationResult::status)
        .def_readonly("ref_index", &LocalizationResult::ref_index)
        .def_readonly("pose", &LocalizationResult::pose)
        .def_readonly("history_pos", &LocalizationResult::history_pos)
        .def_readonly("delta", &LocalizationResult::delta)
        .def_readonly("verified", &LocalizationResult::verified);

    m.def(
        "hoq_best",
        [](const HistoryWindow& window, bool verified) {
            const auto c = hoq_best(window, verified);
            return py::make_tuple(c.declined, c.entry_pos);
        },
        py::arg("window"), py::arg("verified"));
    m.def("hoq_localize", &hoq_localize, py::arg("window"), py::arg("current_odometer"),
          py::arg("traverse"), py::arg("verified"));

    py::class_<ErrorStats>(m, "ErrorStats")
        .def_readonly("mean", &ErrorStats::mean)
        .def_readonly("median", &ErrorStats::median)
        .def_readonly("max", &ErrorStats::max)
        .def_readonly("count", &ErrorStats::count);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("experiment", &MetricsReport::experiment)
        .def_readonly("method", &MetricsReport::method)
        .def_readonly("mission_completion", &MetricsReport::mission_completion)
        .def_readonly("goal_error", &MetricsReport::goal_error)
        .def_readonly("localization_error", &MetricsReport::localization_error)
        .def_readonly("precision", &MetricsReport::precision)
        .def_readonly("recall", &MetricsReport::recall)
        .def_readonly("declined", &MetricsReport::declined)
        .def_readonly("emitted", &MetricsReport::emitted)
        .def_readonly("opportunities", &MetricsReport::opportunities);

    py::class_<MatchSet>(m, "MatchSet")
        .def_readonly("matches", &MatchSet::matches)
        .def_readonly("gt_position", &MatchSet::gt_position);

    m.def("compute_match_set", &compute_match_set, py::arg("traverse"), py::arg("queries"),
          py::arg("metric"), py::arg("cfg"));

    py::class_<Exp1Config>(m, "Exp1Config")
        .def(py::init<>())
        .def_readwrite("n_starts", &Exp1Config::n_starts)
        .def_readwrite("goal_distances", &Exp1Config::goal_distances)
        .def_readwrite("assessment_tolerance", &Exp1Config::assessment_tolerance)
        .def_readwrite("arrival_margin", &Exp1Config::arrival_margin)
        .def_readwrite("seed", &Exp1Config::seed);

    py::class_<Exp2Config>(m, "Exp2Config")
        .def(py::init<>())
        .def_readwrite("window_d", &Exp2Config::window_d)
        .def_readwrite("warmup", &Exp2Config::warmup);

    py::class_<Exp1Mission>(m, "Exp1Mission")
        .def_readonly("start_index", &Exp1Mission::start_index)
        .def_readonly("goal_distance", &Exp1Mission::goal_distance)
        .def_readonly("arrived", &Exp1Mission::arrived)
        .def_readonly("complete", &Exp1Mission::complete)
        .def_readonly("goal_error", &Exp1Mission::goal_error);

    py::class_<Exp1Result>(m, "Exp1Result")
        .def_readonly("missions", &Exp1Result::missions)
        .def_readonly("metrics", &Exp1Result::metrics);

    py::enum_<QueryStatus>(m, "QueryStatus")
        .value("Warmup", QueryStatus::Warmup)
        .value("Declined", QueryStatus::Declined)
        .value("Estimate", QueryStatus::Estimate);

    py::class_<Exp2QueryRecord>(m, "Exp2QueryRecord")
        .def_readonly("query", &Exp2QueryRecord::query)
        .def_readonly("status", &Exp2QueryRecord::status)
        .def_readonly("prediction", &Exp2QueryRecord::prediction)
        .def_readonly("ref_index", &Exp2QueryRecord::ref_index)
        .def_readonly("error", &Exp2QueryRecord::error)
        .def_readonly("in_tolerance", &Exp2QueryRecord::in_tolerance);

    py::class_<Exp2Result>(m, "Exp2Result")
        .def_readonly("records", &Exp2Result::records)
        .def_readonly("metrics", &Exp2Result::metrics);

    m.def(
        "run_exp1",
        [](const Traverse& traverse, const QueryStream& queries, const MatchSet& match_set,
           const std::string& method, const MlpModel* model, double threshold,
           const Exp1Config& cfg, const ToleranceConfig& tol) {
            const auto method_spec = make_method(method, model, threshold);
            const auto preds = predict_stream(traverse, queries, match_set, method_spec);
            return run_exp1(traverse, queries, match_set, preds, cfg, tol, method_spec.name);
        },
        py::arg("traverse"), py::arg("queries"), py::arg("match_set"), py::arg("method"),
        py::arg("model") = nullptr, py::arg("threshold") = 0.0,
        py::arg("cfg") = Exp1Config{}, py::arg("tol") = ToleranceConfig{});

    m.def(
        "run_exp2",
        [](const Traverse& traverse, const QueryStream& queries, const MatchSet& match_set,
           const std::string& method, const MlpModel* model, double threshold,
           const Exp2Config& cfg, const ToleranceConfig& tol) {
            const auto method_spec = make_method(method, model, threshold);
            const auto preds = predict_stream(traverse, queries, match_set, method_spec);
            const bool verified_mode = method_spec.kind != MethodKind::Baseline;
            return run_exp2(traverse, queries, match_set, preds, verified_mode, cfg, tol,
                            method_spec.name);
        },
        py::arg("traverse"), py::arg("queries"), py::arg("match_set"), py::arg("method"),
        py::arg("model") = nullptr, py::arg("threshold") = 0.0,
        py::arg("cfg") = Exp2Config{}, py::arg("tol") = ToleranceConfig{});

    py::class_<ThresholdBaseline> tb(m, "ThresholdBaseline");
    py::enum_<ThresholdBaseline::Kind>(tb, "Kind")
        .value("Precision", ThresholdBaseline::Kind::Precision)
        .value("Recall", ThresholdBaseline::Kind::Recall);
    tb.def_readonly("kind", &ThresholdBaseline::kind)
        .def_readonly("target", &ThresholdBaseline::target)
        .def_readonly("threshold", &ThresholdBaseline::threshold)
        .def_readonly("achieved_precision", &ThresholdBaseline::achieved_precision)
        .def_readonly("achieved_recall", &ThresholdBaseline::achieved_recall)
        .def_readonly("attainable", &ThresholdBaseline::attainable);

    m.def("calibrate_threshold", &calibrate_threshold, py::arg("training_matches"),
          py::arg("kind"), py::arg("target"));
}
