#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vprmon/experiments.hpp"

namespace vprmon {

inline constexpr const char* kManifestName = "run_manifest.json";

/// Reproducibility header written before any result file. Every result
/// file references it by name. The creation timestamp is the only
/// non-deterministic field.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::uint32_t catalogue_version = 0;
    std::string model_crc32;  // input model checksum, empty when none
    std::map<std::string, std::string> config;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

void write_exp1_missions_csv(const std::vector<Exp1Mission>& missions,
                             const std::string& method,
                             const std::map<std::string, std::string>& config,
                             const std::filesystem::path& file);
void write_exp1_queries_csv(const std::vector<QueryVerdict>& verdicts,
                            const std::string& method,
                            const std::map<std::string, std::string>& config,
                            const std::filesystem::path& file);
void write_exp2_queries_csv(const std::vector<Exp2QueryRecord>& records,
                            const std::string& method,
                            const std::map<std::string, std::string>& config,
                            const std::filesystem::path& file);
void write_verify_csv(const std::vector<QueryVerdict>& verdicts, const std::string& method,
                      const std::map<std::string, std::string>& config,
                      const std::filesystem::path& file);

std::vector<Exp1Mission> read_exp1_missions_csv(const std::filesystem::path& file,
                                                std::string* method = nullptr);
std::vector<QueryVerdict> read_exp1_queries_csv(const std::filesystem::path& file,
                                                std::string* method = nullptr);
std::vector<Exp2QueryRecord> read_exp2_queries_csv(const std::filesystem::path& file,
                                                   std::string* method = nullptr);
std::vector<QueryVerdict> read_verify_csv(const std::filesystem::path& file,
                                          std::string* method = nullptr);

void write_metrics_json(const MetricsReport& report,
                        const std::map<std::string, std::string>& config,
                        const std::filesystem::path& file);
MetricsReport read_metrics_json(const std::filesystem::path& file);

void write_thresholds_json(const ThresholdBaseline& np, const ThresholdBaseline& nr,
                           const std::map<std::string, std::string>& config,
                           const std::filesystem::path& file);
/// Returns {np, nr}; throws if either entry is missing.
std::pair<ThresholdBaseline, ThresholdBaseline> read_thresholds_json(
    const std::filesystem::path& file);

void write_train_log_csv(const std::vector<TrainEpoch>& log,
                         const std::map<std::string, std::string>& config,
                         const std::filesystem::path& file);

/// Emits docs/catalogue.json content: the 48 statistic definitions in
/// catalogue order plus the version and numeric conventions.
std::string catalogue_json();

}  // namespace vprmon
