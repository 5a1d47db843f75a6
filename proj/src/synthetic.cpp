#include "vprmon/synthetic.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>

#include "vprmon/errors.hpp"
#include "vprmon/rng.hpp"

namespace vprmon {
namespace {

// Fixed generator shape parameters. Kept out of SynthConfig so a config
// is fully described by (n, m, spacing, aliasing_rate, noise_sigma, seed).
constexpr double kHeadingStep = 0.1;      // max |heading change| per step, radians
constexpr double kConditionLo = 0.6;      // per-query noise scale range
constexpr double kConditionHi = 1.4;
constexpr double kBlendLo = 0.28;         // true-place residual for aliased queries
constexpr double kBlendHi = 0.45;
constexpr std::size_t kMinAliasOffset = 5;

void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
}

std::vector<double> random_unit_vector(SeededRng& rng, std::size_t m) {
    std::vector<double> v(m);
    for (double& x : v) x = rng.normal();
    normalize(v);
    return v;
}

std::uint64_t row_hash(std::span<const float> row) {
    std::uint64_t h = 1469598103934665603ULL;
    for (float f : row) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        h = (h ^ bits) * 1099511628211ULL;
    }
    return h;
}

}  // namespace

SyntheticDataset generate_synthetic(const SynthConfig& config) {
    if (config.n < 2) throw ConfigError("synthetic config needs n >= 2");
    if (config.m < 2) throw ConfigError("synthetic config needs m >= 2");
    if (config.spacing <= 0.0) throw ConfigError("synthetic config needs spacing > 0");
    if (config.aliasing_rate < 0.0 || config.aliasing_rate > 1.0) {
        throw ConfigError("aliasing_rate must be in [0, 1]");
    }
    if (config.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (config.aliasing_rate > 0.0 && config.n <= 2 * kMinAliasOffset) {
        throw ConfigError("aliasing needs n > " + std::to_string(2 * kMinAliasOffset));
    }

    SeededRng rng(config.seed);
    const std::size_t n = config.n;
    const std::size_t m = config.m;

    SyntheticDataset ds;
    ds.traverse.label = config.label;

    // Poses: heading random walk with exact per-step arc length, so the
    // derived cumulative odometry is k * spacing.
    ds.traverse.poses.resize(n);
    double heading = 0.0;
    double x = 0.0;
    double y = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ds.traverse.poses[k] = Pose2D{x, y, normalize_angle(heading)};
        heading += rng.uniform(-kHeadingStep, kHeadingStep);
        x += config.spacing * std::cos(heading);
        y += config.spacing * std::sin(heading);
    }
    ds.traverse.odom = derive_odom(ds.traverse.poses);

    // Reference features: distinct random unit vectors. Exact duplicates
    // are redrawn (practically unreachable, but the contract says distinct).
    ds.traverse.features = FeatureMatrix(n, m);
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t k = 0; k < n; ++k) {
        for (;;) {
            const auto v = random_unit_vector(rng, m);
            auto row = ds.traverse.features.row(k);
            for (std::size_t j = 0; j < m; ++j) row[j] = static_cast<float>(v[j]);
            const auto h = row_hash(row);
            if (seen.insert(h).second) break;
        }
    }

    // Aliased query subset, exactly floor(rate * n) of them.
    const std::size_t alias_count =
        static_cast<std::size_t>(config.aliasing_rate * static_cast<double>(n));
    const auto aliased = rng.sample_indices(n, alias_count);
    std::vector<bool> is_aliased(n, false);
    for (std::size_t idx : aliased) is_aliased[idx] = true;

    ds.queries.features = FeatureMatrix(n, m);
    ds.queries.ground_truth = ds.traverse.poses;
    ds.queries.odometer = ds.traverse.odom;
    ds.queries.rate_hint_hz = config.rate_hint_hz;
    ds.provenance.resize(n);

    std::vector<double> core(m);
    for (std::size_t k = 0; k < n; ++k) {
        ProvenanceRecord& prov = ds.provenance[k];
        prov.query_index = k + 1;
        prov.true_ref = k + 1;
        prov.source_ref = k + 1;
        prov.condition = rng.uniform(kConditionLo, kConditionHi);

        const auto true_row = ds.traverse.features.row(k);
        if (is_aliased[k]) {
            // Wrong reference, uniform over indices >= kMinAliasOffset away.
            const std::size_t lo_count = k >= kMinAliasOffset ? k - kMinAliasOffset + 1 : 0;
            const std::size_t hi_count =
                k + kMinAliasOffset < n ? n - (k + kMinAliasOffset) : 0;
            std::size_t pick = rng.index(lo_count + hi_count);
            const std::size_t wrong =
                pick < lo_count ? pick : k + kMinAliasOffset + (pick - lo_count);
            prov.aliased = true;
            prov.source_ref = wrong + 1;
            prov.blend = rng.uniform(kBlendLo, kBlendHi);

            const auto wrong_row = ds.traverse.features.row(wrong);
            for (std::size_t j = 0; j < m; ++j) {
                core[j] = static_cast<double>(wrong_row[j]) +
                          prov.blend * static_cast<double>(true_row[j]);
            }
            normalize(core);
        } else {
            for (std::size_t j = 0; j < m; ++j) core[j] = static_cast<double>(true_row[j]);
        }

        const double scale = prov.condition * config.noise_sigma;
        auto out = ds.queries.features.row(k);
        for (std::size_t j = 0; j < m; ++j) {
            out[j] = static_cast<float>(core[j] + scale * rng.normal());
        }
    }

    return ds;
}

void save_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_traverse(ds.traverse, dir / "reference");
    save_query_stream(ds.queries, dir / "query");
    save_provenance(ds.provenance, dir / "provenance.csv");
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.traverse = load_traverse(dir / "reference");
    ds.queries = load_query_stream(dir / "query");
    validate_query_stream(ds.queries, ds.traverse.features.dim());
    return ds;
}

}  // namespace vprmon
