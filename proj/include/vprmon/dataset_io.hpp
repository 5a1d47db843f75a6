#pragma once

#include <filesystem>
#include <vector>

#include "vprmon/types.hpp"

namespace vprmon {

/// How feature payloads are stored alongside poses.csv.
/// Auto prefers features.bin and falls back to features.csv.
enum class FeatureFormat { Auto, Binary, Csv };

/// Dataset directory layout:
///   <dir>/poses.csv      index,x,y,theta[,odom]
///   <dir>/features.bin   "VPRF" | u32 version | u32 n | u32 m | n*m le f32
///   <dir>/features.csv   alternative plain-text payload, one row per entry
///
/// When the odom column is absent it is derived from consecutive pose
/// gaps; when present it is trusted as recorded.
Traverse load_traverse(const std::filesystem::path& dir,
                       FeatureFormat format = FeatureFormat::Auto);

/// Same directory schema; poses are ground truth, odom is the odometer.
QueryStream load_query_stream(const std::filesystem::path& dir,
                              FeatureFormat format = FeatureFormat::Auto);

void save_traverse(const Traverse& t, const std::filesystem::path& dir);
void save_query_stream(const QueryStream& q, const std::filesystem::path& dir);

FeatureMatrix read_features_bin(const std::filesystem::path& file);
void write_features_bin(const FeatureMatrix& m, const std::filesystem::path& file);
FeatureMatrix read_features_csv(const std::filesystem::path& file);

/// Ground-truth flags recorded by the synthetic generator. Indices are
/// 1-based, matching all other external reports.
struct ProvenanceRecord {
    std::size_t query_index = 0;
    std::size_t true_ref = 0;
    bool aliased = false;
    std::size_t source_ref = 0;  // equals true_ref when not aliased
    double condition = 1.0;      // per-query noise scale factor
    double blend = 0.0;          // true-place leakage for aliased queries
};

void save_provenance(const std::vector<ProvenanceRecord>& records,
                     const std::filesystem::path& file);
std::vector<ProvenanceRecord> load_provenance(const std::filesystem::path& file);

/// Doubles are printed with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace vprmon
