#include "vprmon/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vprmon/errors.hpp"

namespace vprmon {
namespace {

constexpr double kEps = 1e-12;

double div0(double a, double b) { return std::fabs(b) < kEps ? 0.0 : a / b; }

// Linear-interpolation quantile on an ascending sorted range, p in [0, 1].
double quantile(std::span<const double> sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = lo + 1 < sorted.size() ? lo + 1 : lo;
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double pop_variance(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) {
        const double d = x - mean;
        s += d * d;
    }
    return s / static_cast<double>(v.size());
}

constexpr StatDef kCatalogueV1[kStatCount] = {
    // moments
    {"mean", "sum(v)/n", true},
    {"std", "sqrt(sum((v-mean)^2)/n)", true},
    {"variance", "sum((v-mean)^2)/n", true},
    {"excess_kurtosis", "m4/var^2 - 3; 0 if var < eps", true},
    {"skewness", "m3/std^3; 0 if var < eps", true},
    {"min", "min(v)", true},
    {"max", "max(v)", true},
    {"range", "max - min", true},
    // order statistics
    {"median", "quantile(0.50), linear interpolation", true},
    {"q25", "quantile(0.25)", true},
    {"q75", "quantile(0.75)", true},
    {"iqr", "q75 - q25", true},
    {"p05", "quantile(0.05)", true},
    {"p95", "quantile(0.95)", true},
    {"argmin_frac", "(1-based first argmin)/n", false},
    {"argmax_frac", "(1-based first argmax)/n", false},
    // normalized shape ratios (guarded division throughout)
    {"mean_over_max", "mean/max", true},
    {"min_over_mean", "min/mean", true},
    {"upper_z_extent", "(max-mean)/std; 0 if var < eps", true},
    {"lower_z_extent", "(mean-min)/std; 0 if var < eps", true},
    {"coeff_variation", "std/mean", true},
    {"median_over_mean", "median/mean", true},
    {"mean_square", "sum(v^2)/n", true},
    {"rms", "sqrt(sum(v^2)/n)", true},
    // sorted-gap statistics, s = sort(v) ascending, 1-based in formulas
    {"gap_low2", "s2 - s1", true},
    {"gap_low2_rel", "(s2-s1)/(sn-s1+eps)", true},
    {"min_over_second", "s1/(s2+eps), guarded", true},
    {"low5_mean_ratio", "mean(5 smallest)/mean(v)", true},
    {"low5_std", "population std of the 5 smallest", true},
    {"low_decile_contrast", "mean(lowest max(1,n/10)) - mean(rest)", true},
    {"second_over_max", "s2/sn, guarded", true},
    {"argmin_pair_spread", "|argmin - arg-second-min|/n, 1-based", false},
    // first-difference statistics, w_i = v_{i+1} - v_i
    {"diff_mean", "mean(w)", false},
    {"diff_std", "population std of w", false},
    {"diff_abs_mean", "mean(|w|)", false},
    {"diff_abs_max", "max(|w|)", false},
    {"sign_change_frac", "count(w_i*w_{i+1}<0)/(|w|-1); 0 if |w|<2", false},
    {"local_min_frac", "interior strict minima/(n-2); 0 if n<3", false},
    {"local_max_frac", "interior strict maxima/(n-2); 0 if n<3", false},
    {"total_variation_rate", "sum(|w|)/n", false},
    // distribution statistics
    {"hist_entropy", "10-bin entropy/ln(10) over [min,max]; 0 if range<=0", true},
    {"frac_within_std", "count(|v-mean|<=std)/n", true},
    {"frac_below_mean", "count(v<mean)/n", true},
    {"frac_near_min", "count(v<=min+0.05*range)/n", true},
    {"autocorr_lag1", "sum((v_i-mean)(v_{i+1}-mean))/(n*var); 0 if var<eps", false},
    {"gini", "Gini coefficient of v-min; 0 if sum(v-min)<eps", true},
    {"inverted_peak_ratio", "range/(max-mean), guarded", true},
    {"frac_at_min", "count(|v-min|<=eps)/n", true},
};

}  // namespace

const StatCatalogue& StatCatalogue::v1() {
    static const StatCatalogue cat(1, std::span<const StatDef>(kCatalogueV1, kStatCount));
    return cat;
}

std::size_t StatCatalogue::index_of(const char* name) const {
    for (std::size_t i = 0; i < defs_.size(); ++i) {
        if (std::string_view(defs_[i].name) == name) return i;
    }
    throw ConfigError(std::string("unknown statistic: ") + name);
}

std::array<double, kStatCount> extract_stats(std::span<const double> v,
                                             const StatCatalogue& catalogue) {
    if (catalogue.version() != 1) {
        throw ConfigError("unsupported catalogue version " +
                          std::to_string(catalogue.version()));
    }
    const std::size_t n = v.size();
    if (n < 2) throw DimensionError("extract_stats needs at least 2 entries");
    for (double x : v) {
        if (!std::isfinite(x)) throw ConfigError("extract_stats input has non-finite entry");
    }

    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double nd = static_cast<double>(n);

    std::array<double, kStatCount> out{};

    // moments (from the sorted copy, so they are exactly permutation invariant)
    const double mean = mean_of(s);
    const double var = pop_variance(s, mean);
    const double sd = std::sqrt(var);
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : s) {
        const double d = x - mean;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m3 /= nd;
    m4 /= nd;
    const double vmin = s.front();
    const double vmax = s.back();
    const double range = vmax - vmin;
    out[0] = mean;
    out[1] = sd;
    out[2] = var;
    out[3] = var < kEps ? 0.0 : m4 / (var * var) - 3.0;
    out[4] = var < kEps ? 0.0 : m3 / (sd * sd * sd);
    out[5] = vmin;
    out[6] = vmax;
    out[7] = range;

    // order statistics
    out[8] = quantile(s, 0.50);
    out[9] = quantile(s, 0.25);
    out[10] = quantile(s, 0.75);
    out[11] = out[10] - out[9];
    out[12] = quantile(s, 0.05);
    out[13] = quantile(s, 0.95);
    std::size_t argmin = 0;
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (v[i] < v[argmin]) argmin = i;
        if (v[i] > v[argmax]) argmax = i;
    }
    out[14] = static_cast<double>(argmin + 1) / nd;
    out[15] = static_cast<double>(argmax + 1) / nd;

    // normalized shape ratios
    double sum_sq = 0.0;
    for (double x : s) sum_sq += x * x;
    out[16] = div0(mean, vmax);
    out[17] = div0(vmin, mean);
    out[18] = var < kEps ? 0.0 : (vmax - mean) / sd;
    out[19] = var < kEps ? 0.0 : (mean - vmin) / sd;
    out[20] = var < kEps ? 0.0 : div0(sd, mean);
    out[21] = div0(out[8], mean);
    out[22] = sum_sq / nd;
    out[23] = std::sqrt(sum_sq / nd);

    // sorted-gap statistics
    const std::size_t low_k = n < 5 ? n : 5;
    const std::span<const double> low(s.data(), low_k);
    const double low_mean = mean_of(low);
    const std::size_t decile_k = n / 10 > 0 ? n / 10 : 1;
    const double decile_mean = mean_of({s.data(), decile_k});
    const double rest_mean = mean_of({s.data() + decile_k, n - decile_k});
    std::size_t arg2 = argmin == 0 ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != argmin && v[i] < v[arg2]) arg2 = i;
    }
    out[24] = s[1] - s[0];
    out[25] = (s[1] - s[0]) / (s[n - 1] - s[0] + kEps);
    out[26] = div0(s[0], s[1] + kEps);
    out[27] = div0(low_mean, mean);
    out[28] = std::sqrt(pop_variance(low, low_mean));
    out[29] = decile_mean - rest_mean;
    out[30] = div0(s[1], s[n - 1]);
    out[31] = std::fabs(static_cast<double>(argmin) - static_cast<double>(arg2)) / nd;

    // first-difference statistics
    std::vector<double> w(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) w[i] = v[i + 1] - v[i];
    const double w_mean = mean_of(w);
    double abs_sum = 0.0;
    double abs_max = 0.0;
    std::size_t sign_changes = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        abs_sum += std::fabs(w[i]);
        abs_max = std::max(abs_max, std::fabs(w[i]));
        if (i + 1 < w.size() && w[i] * w[i + 1] < 0.0) ++sign_changes;
    }
    std::size_t minima = 0;
    std::size_t maxima = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (v[i] < v[i - 1] && v[i] < v[i + 1]) ++minima;
        if (v[i] > v[i - 1] && v[i] > v[i + 1]) ++maxima;
    }
    out[32] = w_mean;
    out[33] = std::sqrt(pop_variance(w, w_mean));
    out[34] = abs_sum / static_cast<double>(w.size());
    out[35] = abs_max;
    out[36] = w.size() < 2 ? 0.0
                           : static_cast<double>(sign_changes) /
                                 static_cast<double>(w.size() - 1);
    out[37] = n < 3 ? 0.0 : static_cast<double>(minima) / static_cast<double>(n - 2);
    out[38] = n < 3 ? 0.0 : static_cast<double>(maxima) / static_cast<double>(n - 2);
    out[39] = abs_sum / nd;

    // distribution statistics
    double entropy = 0.0;
    if (range > 0.0) {
        std::array<std::size_t, 10> bins{};
        for (double x : s) {
            auto b = static_cast<std::size_t>((x - vmin) / range * 10.0);
            if (b > 9) b = 9;
            ++bins[b];
        }
        for (std::size_t c : bins) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / nd;
            entropy -= p * std::log(p);
        }
        entropy /= std::log(10.0);
    }
    std::size_t within_std = 0;
    std::size_t below_mean = 0;
    std::size_t near_min = 0;
    std::size_t at_min = 0;
    for (double x : s) {
        if (std::fabs(x - mean) <= sd) ++within_std;
        if (x < mean) ++below_mean;
        if (x <= vmin + 0.05 * range) ++near_min;
        if (std::fabs(x - vmin) <= kEps) ++at_min;
    }
    double autocov = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        autocov += (v[i] - mean) * (v[i + 1] - mean);
    }
    double gini = 0.0;
    double shifted_sum = 0.0;
    for (double x : s) shifted_sum += x - vmin;
    if (shifted_sum >= kEps) {
        double weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weighted += (2.0 * static_cast<double>(i + 1) - nd - 1.0) * (s[i] - vmin);
        }
        gini = weighted / (nd * shifted_sum);
    }
    out[40] = entropy;
    out[41] = static_cast<double>(within_std) / nd;
    out[42] = static_cast<double>(below_mean) / nd;
    out[43] = static_cast<double>(near_min) / nd;
    out[44] = var < kEps ? 0.0 : autocov / (nd * var);
    out[45] = gini;
    out[46] = div0(range, vmax - mean);
    out[47] = static_cast<double>(at_min) / nd;

    return out;
}

FeatureBundle FeatureBundle::make(std::vector<double> d, std::vector<double> q,
                                  std::vector<double> r) {
    if (q.size() != r.size()) {
        throw DimensionError("bundle Q and R must have equal dimension");
    }
    FeatureBundle b;
    b.v.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) b.v[i] = r[i] - q[i];
    b.d = std::move(d);
    b.q = std::move(q);
    b.r = std::move(r);
    return b;
}

FeatureBundle make_bundle(const MatchRecord& match, std::span<const float> query_feature,
                          const Traverse& traverse) {
    const auto ref = traverse.features.row(match.best_index);
    std::vector<double> q(query_feature.begin(), query_feature.end());
    std::vector<double> r(ref.begin(), ref.end());
    return FeatureBundle::make(match.distances, std::move(q), std::move(r));
}

std::array<double, kFeaturizerOutput> featurize(const FeatureBundle& bundle,
                                                const StatCatalogue& catalogue) {
    std::array<double, kFeaturizerOutput> out{};
    const std::span<const double> parts[4] = {bundle.d, bundle.q, bundle.r, bundle.v};
    for (std::size_t p = 0; p < 4; ++p) {
        const auto stats = extract_stats(parts[p], catalogue);
        std::copy(stats.begin(), stats.end(), out.begin() + p * kStatCount);
    }
    return out;
}

}  // namespace vprmon
