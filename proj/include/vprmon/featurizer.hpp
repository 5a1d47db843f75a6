#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vprmon/matcher.hpp"
#include "vprmon/types.hpp"

namespace vprmon {

inline constexpr std::size_t kStatCount = 48;
inline constexpr std::size_t kFeaturizerOutput = 4 * kStatCount;  // 192

struct StatDef {
    const char* name;
    const char* formula;
    bool permutation_invariant;
};

/// The fixed, versioned list of 48 statistics applied to each of the
/// four input vectors. Order is frozen; changing it requires a version
/// bump, and models refuse inputs from a different catalogue version.
class StatCatalogue {
public:
    static const StatCatalogue& v1();

    std::uint32_t version() const { return version_; }
    std::span<const StatDef> defs() const { return defs_; }
    std::size_t size() const { return defs_.size(); }

    /// Index of a statistic by name; throws ConfigError if unknown.
    std::size_t index_of(const char* name) const;

private:
    StatCatalogue(std::uint32_t version, std::span<const StatDef> defs)
        : version_(version), defs_(defs) {}
    std::uint32_t version_;
    std::span<const StatDef> defs_;
};

/// All 48 statistics of one vector, in catalogue order.
///
/// Conventions (applied uniformly, documented in docs/catalogue.json):
///  - eps = 1e-12; ratios use guarded division: a/b is 0 when |b| < eps.
///  - Statistics that divide by the standard deviation (skewness, excess
///    kurtosis, z-extents, coefficient of variation, lag-1
///    autocorrelation) return 0 when the variance is below eps.
///  - Permutation-invariant statistics are computed from a sorted copy,
///    so they are exactly invariant under input permutation.
///  - Positions (argmin/argmax) are 1-based, matching external reports.
/// Requires |v| >= 2 and finite entries; throws otherwise.
std::array<double, kStatCount> extract_stats(std::span<const double> v,
                                             const StatCatalogue& catalogue = StatCatalogue::v1());

/// The four vectors feeding the monitor for one query, per-query:
/// distance vector D, query feature Q, best-match reference feature R,
/// and the difference V = R - Q (computed here, never supplied).
struct FeatureBundle {
    std::vector<double> d;
    std::vector<double> q;
    std::vector<double> r;
    std::vector<double> v;

    static FeatureBundle make(std::vector<double> d, std::vector<double> q,
                              std::vector<double> r);
};

FeatureBundle make_bundle(const MatchRecord& match, std::span<const float> query_feature,
                          const Traverse& traverse);

/// stats(D) || stats(Q) || stats(R) || stats(V), 192 values.
std::array<double, kFeaturizerOutput> featurize(
    const FeatureBundle& bundle, const StatCatalogue& catalogue = StatCatalogue::v1());

}  // namespace vprmon
