#include "vprmon/cli.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "vprmon/binary_io.hpp"
#include "vprmon/dataset_io.hpp"
#include "vprmon/errors.hpp"
#include "vprmon/experiments.hpp"
#include "vprmon/featurizer.hpp"
#include "vprmon/mlp.hpp"
#include "vprmon/model_io.hpp"
#include "vprmon/reporting.hpp"
#include "vprmon/synthetic.hpp"

namespace vprmon {
namespace {

using ConfigMap = std::map<std::string, std::string>;

std::string crc_hex(std::uint32_t crc) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08X", crc);
    return buf;
}

struct CommonOptions {
    std::string metric = "euclidean";
    double tolerance = 0.5;
    std::string distance_mode = "along-track";

    void attach(CLI::App* cmd) {
        cmd->add_option("--metric", metric, "Feature distance metric")
            ->check(CLI::IsMember({"euclidean", "cosine"}));
        cmd->add_option("--tolerance", tolerance, "In-tolerance error bound in meters");
        cmd->add_option("--distance-mode", distance_mode, "Error measurement mode")
            ->check(CLI::IsMember({"along-track", "euclidean"}));
    }

    DistanceMetric parsed_metric() const { return distance_metric_from_string(metric); }
    ToleranceConfig tolerance_config() const {
        return ToleranceConfig{tolerance, distance_mode_from_string(distance_mode)};
    }
    void fill(ConfigMap& config) const {
        config["metric"] = metric;
        config["tolerance"] = format_double(tolerance);
        config["distance_mode"] = distance_mode;
    }
};

struct MethodOptions {
    std::string method = "baseline";
    std::string model_path;
    std::string thresholds_path;
    double threshold_value = 0.0;
    bool threshold_given = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--method", method, "Verification method")
            ->check(CLI::IsMember({"baseline", "np", "nr", "verified", "oracle"}));
        cmd->add_option("--model", model_path, "Trained model file (.vprm)");
        cmd->add_option("--thresholds", thresholds_path,
                        "thresholds.json from calibrate-thresholds");
        cmd->add_option("--threshold", threshold_value, "Explicit match-distance threshold")
            ->each([this](const std::string&) { threshold_given = true; });
    }

    Method resolve(std::optional<MlpModel>& model_storage, ConfigMap& config) const {
        config["method"] = method;
        if (method == "baseline") return baseline_method();
        if (method == "oracle") return oracle_method();
        if (method == "verified") {
            if (model_path.empty()) {
                throw ConfigError("--method verified requires --model");
            }
            model_storage = load_model(model_path);
            config["model"] = model_path;
            config["model_crc32"] = crc_hex(crc32_of_file(model_path));
            return verified_method(*model_storage);
        }
        // np / nr
        double value = threshold_value;
        if (!threshold_given) {
            if (thresholds_path.empty()) {
                throw ConfigError("--method " + method +
                                  " requires --threshold or --thresholds");
            }
            const auto [np, nr] = read_thresholds_json(thresholds_path);
            value = method == "np" ? np.threshold : nr.threshold;
            config["thresholds_file"] = thresholds_path;
        }
        config["threshold_value"] = format_double(value);
        return threshold_method(value, method);
    }
};

RunManifest make_manifest(const std::string& command, const std::vector<std::string>& args,
                          std::uint64_t seed, const ConfigMap& config) {
    RunManifest manifest;
    manifest.command = command;
    manifest.argv = args;
    manifest.seed = seed;
    manifest.catalogue_version = StatCatalogue::v1().version();
    auto it = config.find("model_crc32");
    if (it != config.end()) manifest.model_crc32 = it->second;
    manifest.config = config;
    return manifest;
}

TrainingSet build_training_set(const Traverse& traverse, const QueryStream& queries,
                               const MatchSet& match_set) {
    TrainingSet dataset;
    dataset.reserve(queries.size());
    for (const auto& m : match_set.matches) {
        const auto bundle = make_bundle(m, queries.features.row(m.query_index), traverse);
        const auto input = featurize(bundle);
        dataset.emplace_back(std::vector<double>(input.begin(), input.end()), m.label);
    }
    return dataset;
}

double out_of_tolerance_fraction(const MatchSet& match_set) {
    std::size_t out = 0;
    for (const auto& m : match_set.matches) {
        if (m.label == 0) ++out;
    }
    return static_cast<double>(out) / static_cast<double>(match_set.matches.size());
}

int run_gen_synth(const std::vector<std::string>& args, const SynthConfig& cfg,
                  const std::string& out_dir) {
    ConfigMap config;
    config["seed"] = std::to_string(cfg.seed);
    config["n"] = std::to_string(cfg.n);
    config["m"] = std::to_string(cfg.m);
    config["spacing"] = format_double(cfg.spacing);
    config["aliasing_rate"] = format_double(cfg.aliasing_rate);
    config["noise_sigma"] = format_double(cfg.noise_sigma);
    config["label"] = cfg.label;
    config["rate_hint_hz"] = format_double(cfg.rate_hint_hz);
    write_manifest(make_manifest("gen-synth", args, cfg.seed, config), out_dir);
    const auto ds = generate_synthetic(cfg);
    save_dataset(ds, out_dir);
    std::cout << "gen-synth: wrote " << ds.traverse.size() << " references and "
              << ds.queries.size() << " queries to " << out_dir << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"VPR integrity monitoring toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file; flags win");

    // gen-synth -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
    SynthConfig synth;
    std::string gen_out;
    gen->add_option("--n", synth.n, "Reference count")->required();
    gen->add_option("--m", synth.m, "Feature dimension")->required();
    gen->add_option("--spacing", synth.spacing, "Reference spacing in meters");
    gen->add_option("--aliasing", synth.aliasing_rate, "Fraction of aliased queries");
    gen->add_option("--noise", synth.noise_sigma, "Per-component feature noise scale");
    gen->add_option("--seed", synth.seed, "Random seed");
    gen->add_option("--label", synth.label, "Dataset label");
    gen->add_option("--rate-hint", synth.rate_hint_hz, "Informational sample rate in Hz");
    gen->add_option("--out", gen_out, "Output directory")->required();

    // train -----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train the integrity monitor");
    CommonOptions train_common;
    train_common.attach(train_cmd);
    std::string train_data;
    std::string train_alpha = "auto";
    std::string train_out;
    TrainConfig train_cfg;
    train_cmd->add_option("--data", train_data, "Dataset directory")->required();
    train_cmd->add_option("--alpha", train_alpha,
                          "Loss weight for out-of-tolerance samples, or 'auto'");
    train_cmd->add_option("--batch", train_cfg.batch_size, "Batch size");
    train_cmd->add_option("--lr", train_cfg.learning_rate, "Learning rate");
    train_cmd->add_option("--dropout", train_cfg.dropout, "Dropout rate");
    train_cmd->add_option("--epochs", train_cfg.epochs, "Maximum epochs");
    train_cmd->add_option("--seed", train_cfg.seed, "Random seed");
    std::string train_optimizer = "adam";
    train_cmd->add_option("--optimizer", train_optimizer, "Optimizer")
        ->check(CLI::IsMember({"adam", "sgd"}));
    train_cmd->add_option("--hidden-layers", train_cfg.hidden_layers, "Hidden layer count");
    train_cmd->add_option("--hidden-units", train_cfg.hidden_units, "Units per hidden layer");
    train_cmd->add_option("--decision-threshold", train_cfg.threshold,
                          "Binarization threshold stored in the model");
    train_cmd->add_option("--out", train_out, "Model output path (.vprm)")->required();

    // calibrate-thresholds ----------------------------------------------------
    auto* cal = app.add_subcommand("calibrate-thresholds",
                                   "Calibrate the naive match-distance thresholds");
    CommonOptions cal_common;
    cal_common.attach(cal);
    std::string cal_data;
    std::string cal_model;
    std::string cal_out;
    double cal_target_p = -1.0;
    double cal_target_r = -1.0;
    cal->add_option("--data", cal_data, "Training dataset directory")->required();
    cal->add_option("--model", cal_model,
                    "Model whose training precision/recall set the targets");
    cal->add_option("--target-precision", cal_target_p, "Explicit precision target");
    cal->add_option("--target-recall", cal_target_r, "Explicit recall target");
    cal->add_option("--out", cal_out, "Output directory")->required();

    // verify ------------------------------------------------------------------
    auto* verify_cmd =
        app.add_subcommand("verify", "Single-query verification over a dataset");
    CommonOptions verify_common;
    verify_common.attach(verify_cmd);
    std::string verify_data;
    std::string verify_model;
    std::string verify_out;
    verify_cmd->add_option("--data", verify_data, "Dataset directory")->required();
    verify_cmd->add_option("--model", verify_model, "Trained model file")->required();
    verify_cmd->add_option("--out", verify_out, "Output directory")->required();

    // simulate-exp1 -------------------------------------------------------------
    auto* exp1 = app.add_subcommand("simulate-exp1", "Goal-zone mission experiment");
    CommonOptions exp1_common;
    exp1_common.attach(exp1);
    MethodOptions exp1_method;
    exp1_method.attach(exp1);
    std::string exp1_data;
    std::string exp1_out;
    Exp1Config exp1_cfg;
    exp1->add_option("--data", exp1_data, "Dataset directory")->required();
    exp1->add_option("--n-starts", exp1_cfg.n_starts, "Start locations to sample");
    exp1->add_option("--goals", exp1_cfg.goal_distances, "Goal distances in meters")
        ->delimiter(',');
    exp1->add_option("--assessment-tolerance", exp1_cfg.assessment_tolerance,
                     "Mission completion tolerance in meters");
    exp1->add_option("--arrival-margin", exp1_cfg.arrival_margin,
                     "Arrival flag margin in meters");
    exp1->add_option("--seed", exp1_cfg.seed, "Start sampling seed");
    exp1->add_option("--out", exp1_out, "Output directory")->required();

    // simulate-exp2 --------------------------------------------------------------
    auto* exp2 = app.add_subcommand("simulate-exp2", "Continuous HoQ localization experiment");
    CommonOptions exp2_common;
    exp2_common.attach(exp2);
    MethodOptions exp2_method;
    exp2_method.attach(exp2);
    std::string exp2_data;
    std::string exp2_out;
    Exp2Config exp2_cfg;
    std::uint64_t exp2_seed = 0;
    exp2->add_option("--data", exp2_data, "Dataset directory")->required();
    exp2->add_option("--window", exp2_cfg.window_d, "History window in meters");
    exp2->add_option("--warmup", exp2_cfg.warmup, "Warmup travel in meters (default: window)");
    exp2->add_option("--seed", exp2_seed, "Recorded in the manifest; exp2 replay is seedless");
    exp2->add_option("--out", exp2_out, "Output directory")->required();

    // metrics ---------------------------------------------------------------------
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Recompute metrics.json from result CSVs");
    std::string metrics_in;
    std::string metrics_out;
    metrics_cmd->add_option("--in", metrics_in, "Directory with result CSVs")->required();
    metrics_cmd->add_option("--out", metrics_out,
                            "Output file (default <in>/metrics_recomputed.json)");

    std::vector<const char*> argv_c;
    argv_c.reserve(args.size() + 1);
    argv_c.push_back("vprmon");
    for (const auto& a : args) argv_c.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv_c.size()), argv_c.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "vprmon: " << e.what() << "\n";
        std::cerr << "run 'vprmon --help' for usage\n";
        return 2;
    }

    try {
        if (app.got_subcommand(gen)) {
            return run_gen_synth(args, synth, gen_out);
        }

        if (app.got_subcommand(train_cmd)) {
            const auto dataset_pair = load_dataset(train_data);
            const auto match_set =
                compute_match_set(dataset_pair.traverse, dataset_pair.queries,
                                  train_common.parsed_metric(), train_common.tolerance_config());
            train_cfg.optimizer =
                train_optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
            if (train_alpha == "auto") {
                train_cfg.alpha = choose_alpha_default(out_of_tolerance_fraction(match_set));
            } else {
                train_cfg.alpha = std::stod(train_alpha);
            }

            ConfigMap config;
            train_common.fill(config);
            config["data"] = train_data;
            config["seed"] = std::to_string(train_cfg.seed);
            config["alpha"] = format_double(train_cfg.alpha);
            config["batch"] = std::to_string(train_cfg.batch_size);
            config["lr"] = format_double(train_cfg.learning_rate);
            config["dropout"] = format_double(train_cfg.dropout);
            config["epochs"] = std::to_string(train_cfg.epochs);
            config["optimizer"] = train_optimizer;
            config["hidden_layers"] = std::to_string(train_cfg.hidden_layers);
            config["hidden_units"] = std::to_string(train_cfg.hidden_units);
            config["decision_threshold"] = format_double(train_cfg.threshold);
            const auto out_path = std::filesystem::path(train_out);
            const auto out_dir =
                out_path.has_parent_path() ? out_path.parent_path() : std::filesystem::path(".");
            write_manifest(make_manifest("train", args, train_cfg.seed, config), out_dir);

            const auto training_set =
                build_training_set(dataset_pair.traverse, dataset_pair.queries, match_set);
            auto result = train(training_set, train_cfg);
            save_model(result.model, out_path);
            write_train_log_csv(result.log, config, out_dir / "train_log.csv");
            std::cout << "train: " << result.log.size() << " epochs, final loss "
                      << format_double(result.log.back().loss) << ", model " << train_out
                      << "\n";
            return 0;
        }

        if (app.got_subcommand(cal)) {
            const auto dataset_pair = load_dataset(cal_data);
            const auto match_set =
                compute_match_set(dataset_pair.traverse, dataset_pair.queries,
                                  cal_common.parsed_metric(), cal_common.tolerance_config());
            double target_p = cal_target_p;
            double target_r = cal_target_r;
            ConfigMap config;
            cal_common.fill(config);
            config["data"] = cal_data;
            if (!cal_model.empty()) {
                // Targets come from the monitor's own training operating point.
                const auto model = load_model(cal_model);
                config["model"] = cal_model;
                config["model_crc32"] = crc_hex(crc32_of_file(cal_model));
                const auto preds = predict_stream(dataset_pair.traverse, dataset_pair.queries,
                                                  match_set, verified_method(model));
                std::size_t tp = 0;
                std::size_t accepted = 0;
                std::size_t positives = 0;
                for (std::size_t k = 0; k < preds.size(); ++k) {
                    const int label = match_set.matches[k].label;
                    positives += static_cast<std::size_t>(label);
                    if (preds[k].binary == 1) {
                        ++accepted;
                        if (label == 1) ++tp;
                    }
                }
                target_p = accepted == 0
                               ? 1.0
                               : static_cast<double>(tp) / static_cast<double>(accepted);
                target_r = positives == 0
                               ? 0.0
                               : static_cast<double>(tp) / static_cast<double>(positives);
            }
            if (target_p < 0.0 || target_r < 0.0) {
                throw ConfigError(
                    "calibrate-thresholds needs --model or both --target-precision and "
                    "--target-recall");
            }
            config["target_precision"] = format_double(target_p);
            config["target_recall"] = format_double(target_r);
            write_manifest(make_manifest("calibrate-thresholds", args, 0, config), cal_out);
            const auto np = calibrate_threshold(match_set.matches,
                                                ThresholdBaseline::Kind::Precision, target_p);
            const auto nr = calibrate_threshold(match_set.matches,
                                                ThresholdBaseline::Kind::Recall, target_r);
            write_thresholds_json(np, nr, config,
                                  std::filesystem::path(cal_out) / "thresholds.json");
            std::cout << "calibrate-thresholds: N_P " << format_double(np.threshold) << ", N_R "
                      << format_double(nr.threshold) << "\n";
            return 0;
        }

        if (app.got_subcommand(verify_cmd)) {
            const auto dataset_pair = load_dataset(verify_data);
            const auto match_set =
                compute_match_set(dataset_pair.traverse, dataset_pair.queries,
                                  verify_common.parsed_metric(),
                                  verify_common.tolerance_config());
            const auto model = load_model(verify_model);
            ConfigMap config;
            verify_common.fill(config);
            config["data"] = verify_data;
            config["model"] = verify_model;
            config["model_crc32"] = crc_hex(crc32_of_file(verify_model));
            write_manifest(make_manifest("verify", args, 0, config), verify_out);
            const auto preds = predict_stream(dataset_pair.traverse, dataset_pair.queries,
                                              match_set, verified_method(model));
            std::vector<QueryVerdict> verdicts;
            for (std::size_t k = 0; k < preds.size(); ++k) {
                const auto& m = match_set.matches[k];
                QueryVerdict v;
                v.query = k;
                v.acted = preds[k].binary == 1;
                v.raw = preds[k].raw;
                v.match_distance = m.distances[m.best_index];
                v.best_index = m.best_index;
                v.gt_error = m.gt_error;
                v.label = m.label;
                verdicts.push_back(v);
            }
            const auto out_dir = std::filesystem::path(verify_out);
            write_verify_csv(verdicts, "verified", config, out_dir / "verify.csv");
            const auto report = compute_verify_metrics(verdicts, "verified");
            write_metrics_json(report, config, out_dir / "metrics.json");
            std::cout << "verify: precision " << format_double(report.precision) << ", recall "
                      << format_double(report.recall) << "\n";
            return 0;
        }

        if (app.got_subcommand(exp1)) {
            const auto dataset_pair = load_dataset(exp1_data);
            const auto tol = exp1_common.tolerance_config();
            const auto match_set = compute_match_set(dataset_pair.traverse,
                                                     dataset_pair.queries,
                                                     exp1_common.parsed_metric(), tol);
            ConfigMap config;
            exp1_common.fill(config);
            config["data"] = exp1_data;
            config["seed"] = std::to_string(exp1_cfg.seed);
            config["n_starts"] = std::to_string(exp1_cfg.n_starts);
            {
                std::ostringstream goals;
                for (std::size_t i = 0; i < exp1_cfg.goal_distances.size(); ++i) {
                    if (i > 0) goals << ',';
                    goals << format_double(exp1_cfg.goal_distances[i]);
                }
                config["goals"] = goals.str();
            }
            config["assessment_tolerance"] = format_double(exp1_cfg.assessment_tolerance);
            config["arrival_margin"] = format_double(exp1_cfg.arrival_margin);
            std::optional<MlpModel> model_storage;
            const auto method = exp1_method.resolve(model_storage, config);
            write_manifest(make_manifest("simulate-exp1", args, exp1_cfg.seed, config),
                           exp1_out);
            const auto preds = predict_stream(dataset_pair.traverse, dataset_pair.queries,
                                              match_set, method);
            const auto result = run_exp1(dataset_pair.traverse, dataset_pair.queries,
                                         match_set, preds, exp1_cfg, tol, method.name);
            for (double g : result.skipped_goals) {
                std::cerr << "vprmon: warning: goal distance " << format_double(g)
                          << " exceeds the traverse; missions skipped\n";
            }
            const auto out_dir = std::filesystem::path(exp1_out);
            write_exp1_missions_csv(result.missions, method.name, config,
                                    out_dir / "exp1_missions.csv");
            write_exp1_queries_csv(result.verdicts, method.name, config,
                                   out_dir / "exp1_queries.csv");
            write_metrics_json(result.metrics, config, out_dir / "metrics.json");
            std::cout << "simulate-exp1: " << result.metrics.missions_complete << "/"
                      << result.metrics.missions_total << " missions complete, mean goal error "
                      << format_double(result.metrics.goal_error.mean) << " m\n";
            return 0;
        }

        if (app.got_subcommand(exp2)) {
            const auto dataset_pair = load_dataset(exp2_data);
            const auto tol = exp2_common.tolerance_config();
            const auto match_set = compute_match_set(dataset_pair.traverse,
                                                     dataset_pair.queries,
                                                     exp2_common.parsed_metric(), tol);
            ConfigMap config;
            exp2_common.fill(config);
            config["data"] = exp2_data;
            config["seed"] = std::to_string(exp2_seed);
            config["window"] = format_double(exp2_cfg.window_d);
            config["warmup"] =
                format_double(exp2_cfg.warmup < 0.0 ? exp2_cfg.window_d : exp2_cfg.warmup);
            std::optional<MlpModel> model_storage;
            const auto method = exp2_method.resolve(model_storage, config);
            write_manifest(make_manifest("simulate-exp2", args, exp2_seed, config), exp2_out);
            const auto preds = predict_stream(dataset_pair.traverse, dataset_pair.queries,
                                              match_set, method);
            const bool verified_mode = method.kind != MethodKind::Baseline;
            const auto result = run_exp2(dataset_pair.traverse, dataset_pair.queries,
                                         match_set, preds, verified_mode, exp2_cfg, tol,
                                         method.name);
            const auto out_dir = std::filesystem::path(exp2_out);
            write_exp2_queries_csv(result.records, method.name, config,
                                   out_dir / "exp2_queries.csv");
            write_metrics_json(result.metrics, config, out_dir / "metrics.json");
            std::cout << "simulate-exp2: precision " << format_double(result.metrics.precision)
                      << ", recall " << format_double(result.metrics.recall)
                      << ", mean localization error "
                      << format_double(result.metrics.localization_error.mean) << " m\n";
            return 0;
        }

        if (app.got_subcommand(metrics_cmd)) {
            const auto in_dir = std::filesystem::path(metrics_in);
            const auto out_file = metrics_out.empty()
                                      ? in_dir / "metrics_recomputed.json"
                                      : std::filesystem::path(metrics_out);
            ConfigMap config;
            config["in"] = metrics_in;
            MetricsReport report;
            std::string method;
            if (std::filesystem::exists(in_dir / "exp2_queries.csv")) {
                const auto records =
                    read_exp2_queries_csv(in_dir / "exp2_queries.csv", &method);
                report = compute_exp2_metrics(records, method);
            } else if (std::filesystem::exists(in_dir / "exp1_missions.csv")) {
                const auto missions =
                    read_exp1_missions_csv(in_dir / "exp1_missions.csv", &method);
                const auto verdicts = read_exp1_queries_csv(in_dir / "exp1_queries.csv");
                report = compute_exp1_metrics(missions, verdicts, method);
            } else if (std::filesystem::exists(in_dir / "verify.csv")) {
                const auto verdicts = read_verify_csv(in_dir / "verify.csv", &method);
                report = compute_verify_metrics(verdicts, method);
            } else {
                throw IoError("no result CSVs found in " + in_dir.string());
            }
            write_metrics_json(report, config, out_file);
            std::cout << "metrics: wrote " << out_file.string() << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "vprmon: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "vprmon: error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace vprmon
