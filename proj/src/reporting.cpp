#include "vprmon/reporting.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vprmon/dataset_io.hpp"
#include "vprmon/errors.hpp"
#include "vprmon/featurizer.hpp"

namespace vprmon {
namespace {

using nlohmann::json;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_json(const std::map<std::string, std::string>& config) {
    json j = json::object();
    for (const auto& [k, v] : config) j[k] = v;
    return j;
}

void write_csv_header(std::ofstream& out, const char* kind, const std::string& method,
                      const std::map<std::string, std::string>& config) {
    out << "# vprmon " << kind << "\n";
    out << "# manifest: " << kManifestName << "\n";
    out << "# method: " << method << "\n";
    out << "# config: " << config_json(config).dump() << "\n";
}

std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    return out;
}

struct CsvTable {
    std::string method;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    CsvTable table;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line[0] == '#') {
            const std::string method_tag = "# method: ";
            if (line.rfind(method_tag, 0) == 0) table.method = line.substr(method_tag.size());
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (!header_seen) {
            table.columns = std::move(fields);
            header_seen = true;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (!header_seen) throw LoadError("no column header in " + file.string());
    return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name,
                         const std::filesystem::path& file) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (table.columns[i] == name) return i;
    }
    throw LoadError("missing column '" + name + "' in " + file.string());
}

double to_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

json error_stats_json(const ErrorStats& stats) {
    return json{{"mean", stats.mean},
                {"median", stats.median},
                {"max", stats.max},
                {"count", stats.count}};
}

ErrorStats error_stats_from_json(const json& j) {
    ErrorStats stats;
    stats.mean = j.at("mean").get<double>();
    stats.median = j.at("median").get<double>();
    stats.max = j.at("max").get<double>();
    stats.count = j.at("count").get<std::size_t>();
    return stats;
}

json threshold_json(const ThresholdBaseline& t) {
    return json{{"kind", t.kind == ThresholdBaseline::Kind::Precision ? "np" : "nr"},
                {"target", t.target},
                {"threshold", t.threshold},
                {"precision", t.achieved_precision},
                {"recall", t.achieved_recall},
                {"attainable", t.attainable}};
}

ThresholdBaseline threshold_from_json(const json& j) {
    ThresholdBaseline t;
    t.kind = j.at("kind").get<std::string>() == "np" ? ThresholdBaseline::Kind::Precision
                                                     : ThresholdBaseline::Kind::Recall;
    t.target = j.at("target").get<double>();
    t.threshold = j.at("threshold").get<double>();
    t.achieved_precision = j.at("precision").get<double>();
    t.achieved_recall = j.at("recall").get<double>();
    t.attainable = j.at("attainable").get<bool>();
    return t;
}

}  // namespace

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json j;
    j["tool"] = "vprmon";
    j["command"] = manifest.command;
    j["argv"] = manifest.argv;
    j["seed"] = manifest.seed;
    j["catalogue_version"] = manifest.catalogue_version;
    if (manifest.model_crc32.empty()) {
        j["model_crc32"] = nullptr;
    } else {
        j["model_crc32"] = manifest.model_crc32;
    }
    j["config"] = config_json(manifest.config);
    j["created_utc"] = utc_now();
    auto out = open_out(dir / kManifestName);
    out << j.dump(2) << "\n";
}

void write_exp1_missions_csv(const std::vector<Exp1Mission>& missions,
                             const std::string& method,
                             const std::map<std::string, std::string>& config,
                             const std::filesystem::path& file) {
    auto out = open_out(file);
    write_csv_header(out, "simulate-exp1 missions", method, config);
    out << "mission,start_index,start_position,goal_distance,goal_position,arrived,"
           "arrival_query,complete,goal_error\n";
    for (const auto& m : missions) {
        out << m.mission << ',' << (m.start_index + 1) << ',' << format_double(m.start_position)
            << ',' << format_double(m.goal_distance) << ',' << format_double(m.goal_position)
            << ',' << (m.arrived ? 1 : 0) << ',' << m.arrival_query << ','
            << (m.complete ? 1 : 0) << ',' << format_double(m.goal_error) << "\n";
    }
}

std::vector<Exp1Mission> read_exp1_missions_csv(const std::filesystem::path& file,
                                                std::string* method) {
    const auto table = read_csv(file);
    if (method != nullptr) *method = table.method;
    const auto c_mission = column_index(table, "mission", file);
    const auto c_start = column_index(table, "start_index", file);
    const auto c_start_pos = column_index(table, "start_position", file);
    const auto c_goal_dist = column_index(table, "goal_distance", file);
    const auto c_goal_pos = column_index(table, "goal_position", file);
    const auto c_arrived = column_index(table, "arrived", file);
    const auto c_arrival = column_index(table, "arrival_query", file);
    const auto c_complete = column_index(table, "complete", file);
    const auto c_error = column_index(table, "goal_error", file);
    std::vector<Exp1Mission> missions;
    for (const auto& row : table.rows) {
        Exp1Mission m;
        m.mission = static_cast<std::size_t>(to_double(row[c_mission]));
        m.start_index = static_cast<std::size_t>(to_double(row[c_start])) - 1;
        m.start_position = to_double(row[c_start_pos]);
        m.goal_distance = to_double(row[c_goal_dist]);
        m.goal_position = to_double(row[c_goal_pos]);
        m.arrived = to_double(row[c_arrived]) != 0.0;
        m.arrival_query = static_cast<std::size_t>(to_double(row[c_arrival]));
        m.complete = to_double(row[c_complete]) != 0.0;
        m.goal_error = to_double(row[c_error]);
        missions.push_back(m);
    }
    return missions;
}

namespace {

void write_verdict_rows(std::ofstream& out, const std::vector<QueryVerdict>& verdicts) {
    out << "query,acted,raw,match_distance,best_index,gt_error,label\n";
    for (const auto& v : verdicts) {
        out << (v.query + 1) << ',' << (v.acted ? 1 : 0) << ',' << format_double(v.raw) << ','
            << format_double(v.match_distance) << ',' << (v.best_index + 1) << ','
            << format_double(v.gt_error) << ',' << v.label << "\n";
    }
}

std::vector<QueryVerdict> read_verdict_rows(const std::filesystem::path& file,
                                            std::string* method) {
    const auto table = read_csv(file);
    if (method != nullptr) *method = table.method;
    const auto c_query = column_index(table, "query", file);
    const auto c_acted = column_index(table, "acted", file);
    const auto c_raw = column_index(table, "raw", file);
    const auto c_dist = column_index(table, "match_distance", file);
    const auto c_best = column_index(table, "best_index", file);
    const auto c_err = column_index(table, "gt_error", file);
    const auto c_label = column_index(table, "label", file);
    std::vector<QueryVerdict> verdicts;
    for (const auto& row : table.rows) {
        QueryVerdict v;
        v.query = static_cast<std::size_t>(to_double(row[c_query])) - 1;
        v.acted = to_double(row[c_acted]) != 0.0;
        v.raw = to_double(row[c_raw]);
        v.match_distance = to_double(row[c_dist]);
        v.best_index = static_cast<std::size_t>(to_double(row[c_best])) - 1;
        v.gt_error = to_double(row[c_err]);
        v.label = static_cast<int>(to_double(row[c_label]));
        verdicts.push_back(v);
    }
    return verdicts;
}

}  // namespace

void write_exp1_queries_csv(const std::vector<QueryVerdict>& verdicts,
                            const std::string& method,
                            const std::map<std::string, std::string>& config,
                            const std::filesystem::path& file) {
    auto out = open_out(file);
    write_csv_header(out, "simulate-exp1 queries", method, config);
    write_verdict_rows(out, verdicts);
}

std::vector<QueryVerdict> read_exp1_queries_csv(const std::filesystem::path& file,
                                                std::string* method) {
    return read_verdict_rows(file, method);
}

void write_verify_csv(const std::vector<QueryVerdict>& verdicts, const std::string& method,
                      const std::map<std::string, std::string>& config,
                      const std::filesystem::path& file) {
    auto out = open_out(file);
    write_csv_header(out, "verify", method, config);
    write_verdict_rows(out, verdicts);
}

std::vector<QueryVerdict> read_verify_csv(const std::filesystem::path& file,
                                          std::string* method) {
    return read_verdict_rows(file, method);
}

void write_exp2_queries_csv(const std::vector<Exp2QueryRecord>& records,
                            const std::string& method,
                            const std::map<std::string, std::string>& config,
                            const std::filesystem::path& file) {
    auto out = open_out(file);
    write_csv_header(out, "simulate-exp2 queries", method, config);
    out << "query,status,prediction,match_distance,best_index,ref_index,error,in_tolerance\n";
    for (const auto& r : records) {
        out << (r.query + 1) << ',' << to_string(r.status) << ',' << r.prediction << ','
            << format_double(r.match_distance) << ',' << (r.best_index + 1) << ',';
        if (r.status == QueryStatus::Estimate) {
            out << (r.ref_index + 1) << ',' << format_double(r.error) << ',' << r.in_tolerance;
        } else {
            out << 0 << ",," << 0;
        }
        out << "\n";
    }
}

std::vector<Exp2QueryRecord> read_exp2_queries_csv(const std::filesystem::path& file,
                                                   std::string* method) {
    const auto table = read_csv(file);
    if (method != nullptr) *method = table.method;
    const auto c_query = column_index(table, "query", file);
    const auto c_status = column_index(table, "status", file);
    const auto c_pred = column_index(table, "prediction", file);
    const auto c_dist = column_index(table, "match_distance", file);
    const auto c_best = column_index(table, "best_index", file);
    const auto c_ref = column_index(table, "ref_index", file);
    const auto c_err = column_index(table, "error", file);
    const auto c_tol = column_index(table, "in_tolerance", file);
    std::vector<Exp2QueryRecord> records;
    for (const auto& row : table.rows) {
        Exp2QueryRecord r;
        r.query = static_cast<std::size_t>(to_double(row[c_query])) - 1;
        r.status = query_status_from_string(row[c_status]);
        r.prediction = static_cast<int>(to_double(row[c_pred]));
        r.match_distance = to_double(row[c_dist]);
        r.best_index = static_cast<std::size_t>(to_double(row[c_best])) - 1;
        if (r.status == QueryStatus::Estimate) {
            r.ref_index = static_cast<std::size_t>(to_double(row[c_ref])) - 1;
            r.error = to_double(row[c_err]);
            r.in_tolerance = static_cast<int>(to_double(row[c_tol]));
        }
        records.push_back(r);
    }
    return records;
}

void write_metrics_json(const MetricsReport& report,
                        const std::map<std::string, std::string>& config,
                        const std::filesystem::path& file) {
    json j;
    j["experiment"] = report.experiment;
    j["method"] = report.method;
    j["manifest"] = kManifestName;
    j["config"] = config_json(config);
    json m;
    if (report.has_missions) {
        m["mission_completion"] = report.mission_completion;
        m["missions_total"] = report.missions_total;
        m["missions_complete"] = report.missions_complete;
        m["goal_error"] = error_stats_json(report.goal_error);
    } else {
        m["mission_completion"] = nullptr;
        m["goal_error"] = nullptr;
    }
    m["localization_error"] = error_stats_json(report.localization_error);
    m["precision"] = report.precision;
    m["recall"] = report.recall;
    m["declined"] = report.declined;
    m["emitted"] = report.emitted;
    m["opportunities"] = report.opportunities;
    j["metrics"] = m;
    j["conventions"] = {
        {"recall_denominator",
         report.experiment == "exp2" ? "post_warmup_queries" : "all_queries"},
        {"recall_numerator", "in_tolerance_emitted_estimates"},
        {"indexing", "1-based"},
    };
    auto out = open_out(file);
    out << j.dump(2) << "\n";
}

MetricsReport read_metrics_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw LoadError("bad JSON in " + file.string() + ": " + e.what());
    }
    MetricsReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.method = j.at("method").get<std::string>();
    const json& m = j.at("metrics");
    if (!m.at("mission_completion").is_null()) {
        report.has_missions = true;
        report.mission_completion = m.at("mission_completion").get<double>();
        report.missions_total = m.at("missions_total").get<std::size_t>();
        report.missions_complete = m.at("missions_complete").get<std::size_t>();
        report.goal_error = error_stats_from_json(m.at("goal_error"));
    }
    report.localization_error = error_stats_from_json(m.at("localization_error"));
    report.precision = m.at("precision").get<double>();
    report.recall = m.at("recall").get<double>();
    report.declined = m.at("declined").get<std::size_t>();
    report.emitted = m.at("emitted").get<std::size_t>();
    report.opportunities = m.at("opportunities").get<std::size_t>();
    return report;
}

void write_thresholds_json(const ThresholdBaseline& np, const ThresholdBaseline& nr,
                           const std::map<std::string, std::string>& config,
                           const std::filesystem::path& file) {
    json j;
    j["manifest"] = kManifestName;
    j["config"] = config_json(config);
    j["np"] = threshold_json(np);
    j["nr"] = threshold_json(nr);
    json refs = json::array();
    for (const auto& op : reference_operating_points()) {
        refs.push_back(json{{"technique", op.technique},
                            {"precision", op.precision},
                            {"recall", op.recall}});
    }
    j["reference_operating_points"] = refs;
    auto out = open_out(file);
    out << j.dump(2) << "\n";
}

std::pair<ThresholdBaseline, ThresholdBaseline> read_thresholds_json(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw LoadError("bad JSON in " + file.string() + ": " + e.what());
    }
    return {threshold_from_json(j.at("np")), threshold_from_json(j.at("nr"))};
}

void write_train_log_csv(const std::vector<TrainEpoch>& log,
                         const std::map<std::string, std::string>& config,
                         const std::filesystem::path& file) {
    auto out = open_out(file);
    write_csv_header(out, "train", "train", config);
    out << "epoch,loss,train_precision,train_recall\n";
    for (const auto& e : log) {
        out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.precision)
            << ',' << format_double(e.recall) << "\n";
    }
}

std::string catalogue_json() {
    const auto& catalogue = StatCatalogue::v1();
    json j;
    j["catalogue_version"] = catalogue.version();
    j["count"] = catalogue.size();
    j["conventions"] = {
        {"eps", 1e-12},
        {"guarded_division", "a/b evaluates to 0 when |b| < eps"},
        {"zero_variance",
         "skewness, excess kurtosis, z-extents, coefficient of variation, and lag-1 "
         "autocorrelation are 0 when the population variance is below eps"},
        {"quantiles", "linear interpolation between order statistics"},
        {"positions", "argmin/argmax positions are 1-based"},
        {"permutation_invariance",
         "statistics flagged permutation_invariant are computed from a sorted copy and are "
         "exactly invariant under input permutation"},
    };
    json stats = json::array();
    for (const auto& def : catalogue.defs()) {
        stats.push_back(json{{"name", def.name},
                             {"formula", def.formula},
                             {"permutation_invariant", def.permutation_invariant}});
    }
    j["statistics"] = stats;
    return j.dump(2) + "\n";
}

}  // namespace vprmon
