#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vprmon/errors.hpp"
#include "vprmon/localizer.hpp"
#include "vprmon/rng.hpp"

using namespace vprmon;

namespace {

HistoryEntry entry(std::size_t match_index, double distance, double odometer, int pred) {
    return HistoryEntry{match_index, distance, odometer, pred, Pose2D{}};
}

// Exhaustive extrapolation oracle: minimize |delta - alongtrack(b -> j)|
// over all j >= b, first occurrence.
std::size_t extrapolate_oracle(const Traverse& t, std::size_t b, double delta) {
    std::size_t best = b;
    double best_cost = delta;  // S = 0 at j = b
    double running = 0.0;
    for (std::size_t j = b + 1; j < t.size(); ++j) {
        running += planar_distance(t.poses[j - 1], t.poses[j]);
        const double cost = std::fabs(delta - running);
        if (cost < best_cost) {
            best_cost = cost;
            best = j;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("history eviction keeps exactly the last window_d meters") {
    HistoryWindow w;
    w.window_d = 1.5;
    w = update_history(std::move(w), entry(0, 0.5, 0.0, 1));
    w = update_history(std::move(w), entry(1, 0.4, 0.7, 1));
    w = update_history(std::move(w), entry(2, 0.3, 1.4, 1));
    REQUIRE(w.entries.size() == 3);
    w = update_history(std::move(w), entry(3, 0.2, 2.0, 1));
    // 2.0 - 0.0 > 1.5 evicts the first entry; 2.0 - 0.7 = 1.3 stays.
    REQUIRE(w.entries.size() == 3);
    CHECK(w.entries.front().odometer == 0.7);
}

TEST_CASE("window boundary is inclusive") {
    HistoryWindow w;
    w.window_d = 1.5;
    w = update_history(std::move(w), entry(0, 0.5, 0.0, 1));
    w = update_history(std::move(w), entry(1, 0.4, 1.5, 1));
    CHECK(w.entries.size() == 2);  // 1.5 - 0.0 == window_d retained
}

TEST_CASE("empty window plus one entry has size one") {
    HistoryWindow w;
    w = update_history(std::move(w), entry(4, 0.1, 3.0, 1));
    CHECK(w.entries.size() == 1);
}

TEST_CASE("zero-length window keeps only the current odometer") {
    HistoryWindow w;
    w.window_d = 0.0;
    w = update_history(std::move(w), entry(0, 0.5, 1.0, 1));
    w = update_history(std::move(w), entry(1, 0.4, 1.0, 1));
    CHECK(w.entries.size() == 2);  // same odometer, both retained
    w = update_history(std::move(w), entry(2, 0.3, 1.1, 1));
    CHECK(w.entries.size() == 1);
}

TEST_CASE("odometer regression is an error") {
    HistoryWindow w;
    w = update_history(std::move(w), entry(0, 0.5, 2.0, 1));
    CHECK_THROWS_AS(update_history(std::move(w), entry(1, 0.4, 1.0, 1)), ConfigError);
}

TEST_CASE("hoq_best picks the lowest distance and masks rejected entries") {
    HistoryWindow w;
    w.window_d = 10.0;
    w = update_history(std::move(w), entry(10, 0.3, 0.0, 1));
    w = update_history(std::move(w), entry(11, 0.1, 0.5, 1));
    w = update_history(std::move(w), entry(12, 0.2, 1.0, 1));

    SUBCASE("all verified: plain argmin") {
        const auto c = hoq_best(w, true);
        CHECK_FALSE(c.declined);
        CHECK(c.entry_pos == 1);
        const auto unverified = hoq_best(w, false);
        CHECK(unverified.entry_pos == 1);
    }
    SUBCASE("masking the winner moves the choice") {
        w.entries[1].prediction = 0;  // masked to 1 + 0.3 = 1.3
        const auto c = hoq_best(w, true);
        CHECK_FALSE(c.declined);
        CHECK(c.entry_pos == 2);
        // Unverified ranking ignores predictions entirely.
        CHECK(hoq_best(w, false).entry_pos == 1);
    }
    SUBCASE("all rejected declines") {
        for (auto& e : w.entries) e.prediction = 0;
        CHECK(hoq_best(w, true).declined);
        CHECK_FALSE(hoq_best(w, false).declined);
    }
    SUBCASE("empty history is an error, not a decline") {
        HistoryWindow empty;
        CHECK_THROWS_AS(hoq_best(empty, true), ConfigError);
    }
}

TEST_CASE("declines happen exactly when every prediction is zero") {
    SeededRng rng(61);
    for (int trial = 0; trial < 500; ++trial) {
        HistoryWindow w;
        w.window_d = 100.0;
        const std::size_t count = 1 + rng.index(12);
        double odo = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            odo += rng.uniform(0.0, 1.0);
            w = update_history(std::move(w), entry(i, rng.uniform(0.0, 2.0), odo, 0));
        }
        CHECK(hoq_best(w, true).declined);
        const std::size_t lucky = rng.index(count);
        w.entries[lucky].prediction = 1;
        const auto c = hoq_best(w, true);
        CHECK_FALSE(c.declined);
        CHECK(c.entry_pos == lucky);
    }
}

TEST_CASE("no travel since the best match returns that match") {
    const auto t = testutil::line_traverse(10, 4, 1.0);
    HistoryWindow w;
    w.window_d = 5.0;
    w = update_history(std::move(w), entry(4, 0.1, 4.0, 1));
    const auto r = hoq_localize(w, 4.0, t, true);
    REQUIRE(r.status == LocalizationResult::Status::Estimate);
    CHECK(r.ref_index == 4);
    CHECK(r.delta == 0.0);
    CHECK(r.pose.x == t.poses[4].x);
}

TEST_CASE("hand-evaluated extrapolation on a straight traverse") {
    // Spacing 1 m, best match at the fifth reference, 2.4 m of travel:
    // running sums are 0,1,2,3,... and |2.4 - 2| wins, two steps ahead.
    const auto t = testutil::line_traverse(10, 4, 1.0);
    HistoryWindow w;
    w.window_d = 5.0;
    w = update_history(std::move(w), entry(3, 0.1, 10.0, 1));
    const auto r = hoq_localize(w, 12.4, t, true);
    REQUIRE(r.status == LocalizationResult::Status::Estimate);
    CHECK(r.delta == doctest::Approx(2.4));
    CHECK(r.ref_index == 5);
}

TEST_CASE("extrapolation clamps at the traverse end") {
    const auto t = testutil::line_traverse(6, 4, 1.0);
    HistoryWindow w;
    w = update_history(std::move(w), entry(4, 0.1, 0.0, 1));
    const auto r = hoq_localize(w, 50.0, t, true);
    REQUIRE(r.status == LocalizationResult::Status::Estimate);
    CHECK(r.ref_index == 5);  // last reference
}

TEST_CASE("extrapolation equals the exhaustive oracle on random instances") {
    SeededRng rng(83);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 5 + rng.index(30);
        Traverse t;
        double x = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            t.poses.push_back(Pose2D{x, 0.0, 0.0});
            // Occasional zero gaps force ties in the running sums.
            x += rng.uniform01() < 0.2 ? 0.0 : rng.uniform(0.1, 2.0);
        }
        t.odom = derive_odom(t.poses);
        t.features = FeatureMatrix(n, 2);

        const std::size_t b = rng.index(n);
        const double w_b = rng.uniform(0.0, 5.0);
        HistoryWindow w;
        w.window_d = 100.0;
        w = update_history(std::move(w), entry(b, rng.uniform(0.0, 1.0), w_b, 1));
        // Half-step deltas land exactly between running sums, exercising
        // the first-occurrence tie rule.
        const double delta = rng.uniform01() < 0.3
                                 ? std::floor(rng.uniform(0.0, 10.0)) + 0.5
                                 : rng.uniform(0.0, 10.0);
        const auto r = hoq_localize(w, w_b + delta, t, false);
        REQUIRE(r.status == LocalizationResult::Status::Estimate);
        CHECK(r.ref_index == extrapolate_oracle(t, b, delta));
        CHECK(r.ref_index >= b);
    }
}

TEST_CASE("verified and unverified agree when every prediction is one") {
    SeededRng rng(97);
    const auto t = testutil::line_traverse(50, 4, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        HistoryWindow w;
        w.window_d = 3.0;
        double odo = 10.0;
        const std::size_t count = 1 + rng.index(8);
        for (std::size_t i = 0; i < count; ++i) {
            odo += rng.uniform(0.0, 0.5);
            w = update_history(std::move(w),
                               entry(rng.index(40), rng.uniform(0.0, 2.0), odo, 1));
        }
        const double omega = odo + rng.uniform(0.0, 2.0);
        const auto a = hoq_localize(w, omega, t, true);
        const auto b = hoq_localize(w, omega, t, false);
        CHECK(a.status == LocalizationResult::Status::Estimate);
        CHECK(a.ref_index == b.ref_index);
        CHECK(a.history_pos == b.history_pos);
        CHECK(a.delta == b.delta);
    }
}

TEST_CASE("single-query verification forwards exactly the predicted-1 matches") {
    MatchRecord match;
    match.best_index = 7;
    match.pose_estimate = Pose2D{3.5, 0.0, 0.1};
    const auto accepted = verify_single(match, PredictionRecord{0.9, 1});
    CHECK(accepted.accepted);
    CHECK(accepted.ref_index == 7);
    CHECK(accepted.pose.x == 3.5);
    const auto rejected = verify_single(match, PredictionRecord{0.2, 0});
    CHECK_FALSE(rejected.accepted);
}

TEST_CASE("accepted set over a long run equals the predicted-1 set exactly") {
    SeededRng rng(119);
    const auto t = testutil::line_traverse(20, 4, 1.0);
    std::vector<std::size_t> accepted_set;
    std::vector<std::size_t> predicted_ones;
    for (std::size_t k = 0; k < 1000; ++k) {
        MatchRecord match;
        match.query_index = k;
        match.best_index = rng.index(20);
        match.pose_estimate = t.poses[match.best_index];
        const int bit = rng.uniform01() < 0.6 ? 1 : 0;
        if (bit == 1) predicted_ones.push_back(k);
        const auto v = verify_single(match, PredictionRecord{bit ? 0.9 : 0.1, bit});
        if (v.accepted) {
            accepted_set.push_back(k);
            CHECK(v.pose.x == t.poses[match.best_index].x);
        }
    }
    CHECK(accepted_set == predicted_ones);
}
