#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mlo/stats.hpp"

namespace {

TEST(Percentile, NearestRank) {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) v.push_back(i);
    EXPECT_EQ(mlo::percentile(v, 0.95), 95.0);
    EXPECT_EQ(mlo::percentile(v, 0.5), 50.0);
    EXPECT_EQ(mlo::percentile(v, 0.01), 1.0);
    EXPECT_EQ(mlo::percentile(v, 1.0), 100.0);
    EXPECT_EQ(mlo::percentile(v, 0.951), 96.0);
}

TEST(Percentile, SingleSample) {
    const std::vector<double> one{4.2};
    for (double q : {0.01, 0.5, 0.99}) EXPECT_EQ(mlo::percentile(one, q), 4.2);
}

TEST(Percentile, EmptyAndBadQuantile) {
    const std::vector<double> none;
    EXPECT_THROW(mlo::percentile(none, 0.5), mlo::EmptySample);
    const std::vector<double> v{1, 2};
    EXPECT_THROW(mlo::percentile(v, 0.0), mlo::InvalidParameter);
    EXPECT_THROW(mlo::percentile(v, 1.5), mlo::InvalidParameter);
}

TEST(Percentile, ExponentialQuantile) {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(1'000'000);
    for (double& x : v) x = e(rng);
    EXPECT_NEAR(mlo::percentile(v, 0.95), std::log(20.0), 0.01 * std::log(20.0));
}

TEST(Bootstrap, IntervalBracketsTheEstimate) {
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(20000);
    for (double& x : v) x = e(rng);
    std::sort(v.begin(), v.end());
    const double est = mlo::percentile_sorted(v, 0.95);
    const auto ci = mlo::bootstrap_quantile_ci(v, 0.95, 1000, 17);
    EXPECT_LE(ci.low, est);
    EXPECT_GE(ci.high, est);
    EXPECT_LT(ci.high - ci.low, 0.2 * est);
    // the true quantile ln 20 lies inside for this seed
    EXPECT_LE(ci.low, std::log(20.0));
    EXPECT_GE(ci.high, std::log(20.0));
    const auto again = mlo::bootstrap_quantile_ci(v, 0.95, 1000, 17);
    EXPECT_EQ(ci.low, again.low);
    EXPECT_EQ(ci.high, again.high);
}

TEST(Bootstrap, MatchesExplicitResamplingInDistribution) {
    // compare the index-sampling shortcut with materialized resamples
    std::vector<double> v(200);
    for (int i = 0; i < 200; ++i) v[i] = i;
    const auto fast = mlo::bootstrap_quantile_ci(v, 0.9, 4000, 1);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, 199);
    std::vector<double> stats;
    for (int r = 0; r < 4000; ++r) {
        std::vector<double> s(200);
        for (double& x : s) x = v[pick(rng)];
        stats.push_back(mlo::percentile(s, 0.9));
    }
    std::sort(stats.begin(), stats.end());
    EXPECT_NEAR(fast.low, mlo::percentile_sorted(stats, 0.025), 2.0);
    EXPECT_NEAR(fast.high, mlo::percentile_sorted(stats, 0.975), 2.0);
}

TEST(OlsSlope, Line) {
    const std::vector<double> x{0, 1, 2, 3, 4};
    const std::vector<double> y{1, 3, 5, 7, 9};
    EXPECT_NEAR(mlo::ols_slope(x, y), 2.0, 1e-12);
    const std::vector<double> flat{2, 2, 2, 2, 2};
    EXPECT_EQ(mlo::ols_slope(x, flat), 0.0);
}

}  // namespace
