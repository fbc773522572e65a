#include <gtest/gtest.h>

#include <random>

#include "hydro/error.hpp"
#include "hydro/ingest.hpp"
#include "test_support.hpp"

using namespace hydro;
using namespace hydro::testing;

namespace {

std::vector<Reading> at_seconds(std::initializer_list<std::pair<int, double>> pts) {
    std::vector<Reading> out;
    for (auto [t, v] : pts) out.push_back({Instant::from_seconds(t), v, SourceMethod::Lab});
    return out;
}

std::string error_code(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST(Pearson, Examples) {
    std::vector<double> x{1, 2, 3, 4};
    EXPECT_NEAR(*pearson(x, std::vector<double>{2, 4, 6, 8}), 1.0, 1e-12);
    EXPECT_NEAR(*pearson(x, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-12);
    EXPECT_NEAR(*pearson(x, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-12);
    EXPECT_FALSE(pearson(x, std::vector<double>{5, 5, 5, 5}));
    EXPECT_FALSE(pearson(std::vector<double>{1}, std::vector<double>{2}));
}

TEST(Pearson, MatchesOracleAndInvariants) {
    std::mt19937 rng(77);
    std::normal_distribution<double> noise(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 50;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = noise(rng) * 10 + 100;
            y[i] = 0.3 * x[i] + noise(rng) * 5;
        }
        auto r = pearson(x, y);
        auto want = naive_pearson(x, y);
        ASSERT_EQ(r.has_value(), want.has_value());
        if (!r) continue;
        EXPECT_NEAR(*r, *want, 1e-9);
        EXPECT_GE(*r, -1.0);
        EXPECT_LE(*r, 1.0);
        EXPECT_NEAR(*pearson(y, x), *r, 1e-12);

        std::vector<double> ax(n), by(n);
        for (std::size_t i = 0; i < n; ++i) {
            ax[i] = 3.5 * x[i] - 40;
            by[i] = -0.25 * y[i] + 7;
        }
        EXPECT_NEAR(*pearson(ax, by), -*r, 1e-9);
    }
}

TEST(PairNearest, GreedyNearestWithinTolerance) {
    auto a = at_seconds({{0, 1}, {100, 2}, {5000, 3}});
    auto b = at_seconds({{30, 10}, {90, 20}, {9000, 30}});
    auto pairs = pair_nearest(a, b, std::chrono::seconds(60));
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(pairs[1], (std::pair<std::size_t, std::size_t>{1, 1}));
}

TEST(PairNearest, EarlierWinsTie) {
    auto a = at_seconds({{100, 1}});
    auto b = at_seconds({{50, 1}, {150, 2}});
    auto pairs = pair_nearest(a, b, std::chrono::seconds(60));
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].second, 0u);
}

TEST(PairNearest, EachReadingUsedOnce) {
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> t(0, 100'000);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Reading> a, b;
        for (int i = 0; i < 40; ++i) a.push_back({Instant::from_seconds(t(rng)), 0, SourceMethod::Lab});
        for (int i = 0; i < 40; ++i) b.push_back({Instant::from_seconds(t(rng)), 0, SourceMethod::Sensor});
        const auto tol = std::chrono::seconds(3600);
        auto pairs = pair_nearest(a, b, tol);
        std::set<std::size_t> ua, ub;
        for (auto [i, j] : pairs) {
            EXPECT_TRUE(ua.insert(i).second);
            EXPECT_TRUE(ub.insert(j).second);
            const auto gap = a[i].timestamp > b[j].timestamp ? a[i].timestamp - b[j].timestamp
                                                             : b[j].timestamp - a[i].timestamp;
            EXPECT_LE(gap, tol);
        }
    }
}

TEST(Correlate, StoreBackedReport) {
    TempDir dir;
    Store store(dir.path(), fast_store());
    std::vector<Measurement> batch;
    const double xs[] = {1, 2, 3, 4}, ys[] = {1, 3, 2, 4};
    for (int i = 0; i < 4; ++i) {
        batch.push_back(reading("VNS", "DO", i * 86400, xs[i], SourceMethod::Lab));
        batch.push_back(reading("VNS", "DO", i * 86400 + 600, ys[i], SourceMethod::Sensor));
    }
    store.put_batch(batch);
    auto rep = correlate(store, "VNS", "DO", SourceMethod::Lab, SourceMethod::Sensor, Instant::from_seconds(0),
                         Instant::from_seconds(10 * 86400), kDefaultCorrelationToleranceS);
    EXPECT_EQ(rep.n_pairs, 4u);
    ASSERT_TRUE(rep.r);
    EXPECT_NEAR(*rep.r, 0.8, 1e-12);
    EXPECT_FALSE(rep.reason);

    auto tight = correlate(store, "VNS", "DO", SourceMethod::Lab, SourceMethod::Sensor, Instant::from_seconds(0),
                           Instant::from_seconds(10 * 86400), 60);
    EXPECT_EQ(tight.n_pairs, 0u);
    EXPECT_EQ(tight.reason, "INSUFFICIENT_PAIRS");

    store.put_batch(std::vector{reading("VNS", "PH", 0, 7, SourceMethod::Lab), reading("VNS", "PH", 10, 7, SourceMethod::Sensor),
                                reading("VNS", "PH", 100, 8, SourceMethod::Lab),
                                reading("VNS", "PH", 110, 7, SourceMethod::Sensor)});
    auto flat = correlate(store, "VNS", "PH", SourceMethod::Lab, SourceMethod::Sensor, Instant::from_seconds(0),
                          Instant::from_seconds(1000), 60);
    EXPECT_EQ(flat.n_pairs, 2u);
    EXPECT_EQ(flat.reason, "ZERO_VARIANCE");

    auto win = [&](auto fn) { return error_code(fn); };
    EXPECT_EQ(win([&] {
                  correlate(store, "VNS", "DO", SourceMethod::Lab, SourceMethod::Lab, Instant::from_seconds(0),
                            Instant::from_seconds(1), 60);
              }),
              "SAME_SOURCE");
    EXPECT_EQ(win([&] {
                  correlate(store, "NOPE", "DO", SourceMethod::Lab, SourceMethod::Sensor, Instant::from_seconds(0),
                            Instant::from_seconds(1), 60);
              }),
              "UNKNOWN_LOCATION");
    EXPECT_EQ(win([&] {
                  correlate(store, "VNS", "DO", SourceMethod::Lab, SourceMethod::Sensor, Instant::from_seconds(5),
                            Instant::from_seconds(1), 60);
              }),
              "BAD_RANGE");
}
