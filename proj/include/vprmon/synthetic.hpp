#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vprmon/dataset_io.hpp"
#include "vprmon/types.hpp"

namespace vprmon {

struct SynthConfig {
    std::size_t n = 0;          // reference count (>= 2)
    std::size_t m = 0;          // feature dimension (>= 2)
    double spacing = 0.3;       // meters between consecutive references
    double aliasing_rate = 0.0; // fraction of queries turned into VPR failures
    double noise_sigma = 0.0;   // per-component Gaussian noise scale
    std::uint64_t seed = 0;
    std::string label = "synthetic";
    double rate_hint_hz = 10.0;
};

struct SyntheticDataset {
    Traverse traverse;
    QueryStream queries;
    std::vector<ProvenanceRecord> provenance;  // one record per query
};

/// Deterministic synthetic traverse + query stream.
///
/// References are distinct random unit vectors along a gently curving
/// path with exact `spacing` between consecutive poses. Query k sits at
/// reference k; its feature is the reference feature plus isotropic
/// Gaussian noise whose scale varies per query (condition factor in
/// [0.6, 1.4] of noise_sigma), mimicking changing capture conditions.
///
/// A seeded floor(aliasing_rate * n) subset of queries are injected VPR
/// failures: the query feature is built from a uniformly chosen wrong
/// reference at least 5 indices away, carrying a small residual
/// component of the true reference (blend factor in [0.28, 0.45]) plus
/// the same noise treatment. The residual leaves the argmin at the
/// wrong reference while giving failures the second-dip signature real
/// perceptual aliasing produces, which is what makes them learnable.
SyntheticDataset generate_synthetic(const SynthConfig& config);

/// Writes <dir>/reference, <dir>/query, and <dir>/provenance.csv.
void save_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir);

struct Dataset {
    Traverse traverse;
    QueryStream queries;
};

/// Loads the reference/query pair written by save_dataset (or any
/// directory following the same layout).
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace vprmon
