#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "vprmon/errors.hpp"
#include "vprmon/matcher.hpp"
#include "vprmon/rng.hpp"

using namespace vprmon;

namespace {

// Independent per-pair scalar oracle for Euclidean distances.
double euclid_oracle(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += (double(a[i]) - double(b[i])) * (double(a[i]) - double(b[i]));
    }
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("distance to an identical reference is zero") {
    auto t = testutil::line_traverse(5, 6, 1.0);
    const auto ref2 = t.features.row(2);
    std::vector<float> query(ref2.begin(), ref2.end());
    const auto d = distance_vector(query, t, DistanceMetric::Euclidean);
    CHECK(d[2] == 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i != 2) CHECK(d[i] > 0.0);
    }
}

TEST_CASE("orthonormal vectors have cosine distance one") {
    Traverse t;
    t.poses = {{0, 0, 0}, {1, 0, 0}};
    t.odom = derive_odom(t.poses);
    t.features = FeatureMatrix(2, 2);
    t.features.row(0)[0] = 1.0F;
    t.features.row(1)[1] = 1.0F;
    std::vector<float> query = {1.0F, 0.0F};
    const auto d = distance_vector(query, t, DistanceMetric::Cosine);
    CHECK(d[0] == doctest::Approx(0.0));
    CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("euclidean distances match the scalar-loop oracle") {
    auto t = testutil::line_traverse(10, 8, 0.5, 77);
    SeededRng rng(3);
    std::vector<float> query(8);
    for (auto& v : query) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    const auto d = distance_vector(query, t, DistanceMetric::Euclidean);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(std::fabs(d[i] - euclid_oracle(query, t.features.row(i))) <= 1e-12);
    }
}

TEST_CASE("dimension mismatch is a typed error") {
    auto t = testutil::line_traverse(4, 6, 1.0);
    std::vector<float> query(5, 0.0F);
    CHECK_THROWS_AS(distance_vector(query, t, DistanceMetric::Euclidean), DimensionError);
}

TEST_CASE("best_match basics and tie-breaking") {
    CHECK(best_match(std::vector<double>{3, 1, 2}) == 1);
    CHECK(best_match(std::vector<double>{1, 1, 2}) == 0);  // first occurrence wins
    CHECK_THROWS_AS(best_match(std::vector<double>{}), ConfigError);
}

TEST_CASE("best_match agrees with a linear-scan oracle on random input") {
    SeededRng rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> d(1 + rng.index(50));
        for (auto& v : d) v = rng.uniform(0.0, 10.0);
        std::size_t expect = 0;
        for (std::size_t i = 1; i < d.size(); ++i) {
            if (d[i] < d[expect]) expect = i;
        }
        CHECK(best_match(d) == expect);
    }
}

TEST_CASE("best_match is permutation-consistent") {
    SeededRng rng(13);
    std::vector<double> d(20);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 + static_cast<double>(i);
    d[7] = 0.25;  // unique minimum
    std::vector<std::size_t> perm(d.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (int trial = 0; trial < 50; ++trial) {
        rng.shuffle(perm);
        std::vector<double> shuffled(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) shuffled[i] = d[perm[i]];
        const auto best = best_match(shuffled);
        CHECK(perm[best] == 7);
    }
}

TEST_CASE("label_match along-track geometry on a straight line") {
    auto t = testutil::line_traverse(10, 4, 1.0);
    ToleranceConfig cfg{0.5, DistanceMode::AlongTrack};

    SUBCASE("estimate equals ground truth") {
        const auto r = label_match(t.poses[4], t.poses[4], t, cfg);
        CHECK(r.gt_error == 0.0);
        CHECK(r.label == 1);
    }
    SUBCASE("estimate three references past the truth") {
        const auto r = label_match(t.poses[7], t.poses[4], t, cfg);
        CHECK(r.gt_error == doctest::Approx(3.0));
        CHECK(r.label == 0);
    }
    SUBCASE("tolerance boundary is inclusive") {
        ToleranceConfig exact{3.0, DistanceMode::AlongTrack};
        const auto r = label_match(t.poses[7], t.poses[4], t, exact);
        CHECK(r.gt_error == doctest::Approx(3.0));
        CHECK(r.label == 1);
    }
}

TEST_CASE("label is monotone in the tolerance") {
    auto t = testutil::line_traverse(20, 4, 0.5);
    SeededRng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto& est = t.poses[rng.index(20)];
        const auto& gt = t.poses[rng.index(20)];
        const double t1 = rng.uniform(0.1, 5.0);
        const double t2 = t1 + rng.uniform(0.0, 5.0);
        const auto r1 = label_match(est, gt, t, ToleranceConfig{t1, DistanceMode::AlongTrack});
        const auto r2 = label_match(est, gt, t, ToleranceConfig{t2, DistanceMode::AlongTrack});
        CHECK(r1.label <= r2.label);
        CHECK(r1.gt_error == r2.gt_error);
    }
}

TEST_CASE("euclidean labeling mode uses planar distance") {
    auto t = testutil::line_traverse(5, 4, 1.0);
    ToleranceConfig cfg{0.5, DistanceMode::Euclidean};
    const auto r = label_match(Pose2D{0.0, 0.3, 0.0}, Pose2D{0.0, 0.0, 0.0}, t, cfg);
    CHECK(r.gt_error == doctest::Approx(0.3));
    CHECK(r.label == 1);
}
