#include <gtest/gtest.h>

#include <cmath>

#include "retrainbench/evaluation.hpp"
#include "retrainbench/metrics.hpp"
#include "retrainbench/random.hpp"
#include "test_support.hpp"

using namespace retrainbench;

namespace {

using Vec = std::vector<double>;

double oracle_rmsse(const Vec& a, const Vec& f, const Vec& in, std::size_t s) {
  double num = 0, den = 0;
  for (std::size_t t = 0; t < a.size(); ++t) num += std::pow(a[t] - f[t], 2);
  for (std::size_t t = s; t < in.size(); ++t) den += std::pow(in[t] - in[t - s], 2);
  return std::sqrt((num / a.size()) / (den / (in.size() - s)));
}

double oracle_sql(const Vec& a, const Vec& f, double q, const Vec& in, std::size_t s) {
  double num = 0, den = 0;
  for (std::size_t t = 0; t < a.size(); ++t)
    num += a[t] >= f[t] ? q * (a[t] - f[t]) : (1 - q) * (f[t] - a[t]);
  for (std::size_t t = s; t < in.size(); ++t) den += std::abs(in[t] - in[t - s]);
  return (num / a.size()) / (den / (in.size() - s));
}

}  // namespace

TEST(Metrics, RmssePerfectForecastIsZero) {
  const Vec in{1, 3, 2, 5}, a{4, 4};
  EXPECT_EQ(*rmsse(a, a, in, 1), 0.0);
}

TEST(Metrics, RmsseHandCase) {
  const Vec in{1, 2, 3, 4}, a{5, 6}, f{4, 4};
  EXPECT_NEAR(*rmsse(a, f, in, 1), std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(*rmsse(a, f, in, 1), oracle_rmsse(a, f, in, 1), 1e-12);
}

TEST(Metrics, SqlHandCase) {
  const Vec in{1, 2, 3, 4}, a{3}, f{1};
  EXPECT_NEAR(*sql(a, f, 0.9, in, 1), 1.8, 1e-12);
  EXPECT_EQ(*sql(a, a, 0.9, in, 1), 0.0);
}

TEST(Metrics, MedianPinballIsHalfScaledMae) {
  Rng rng(12);
  Vec in(30), a(7), f(7);
  for (double& v : in) v = rng.uniform(0, 10);
  for (double& v : a) v = rng.uniform(0, 10);
  for (double& v : f) v = rng.uniform(0, 10);
  double mae = 0, scale = 0;
  for (std::size_t t = 0; t < a.size(); ++t) mae += std::abs(a[t] - f[t]);
  for (std::size_t t = 1; t < in.size(); ++t) scale += std::abs(in[t] - in[t - 1]);
  EXPECT_NEAR(*sql(a, f, 0.5, in, 1), 0.5 * (mae / a.size()) / (scale / (in.size() - 1)), 1e-12);
}

TEST(Metrics, MatchOracleOnRandomInputs) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.below(50), h = 1 + rng.below(14), s = 1 + rng.below(7);
    Vec in(n), a(h), f(h);
    for (double& v : in) v = rng.uniform(0, 20);
    for (double& v : a) v = rng.uniform(0, 20);
    for (double& v : f) v = rng.uniform(0, 20);
    const double q = rng.uniform(0.01, 0.99);
    EXPECT_NEAR(*rmsse(a, f, in, s), oracle_rmsse(a, f, in, s), 1e-12);
    EXPECT_NEAR(*sql(a, f, q, in, s), oracle_sql(a, f, q, in, s), 1e-12);
    EXPECT_GE(*sql(a, f, q, in, s), 0.0);
  }
}

TEST(Metrics, ScaleInvariance) {
  Rng rng(6);
  Vec in(40), a(5), f(5);
  for (double& v : in) v = rng.uniform(0, 20);
  for (double& v : a) v = rng.uniform(0, 20);
  for (double& v : f) v = rng.uniform(0, 20);
  auto times = [](Vec v, double c) {
    for (double& x : v) x *= c;
    return v;
  };
  for (double c : {10.0, 0.01, 3.7}) {
    EXPECT_NEAR(*rmsse(times(a, c), times(f, c), times(in, c), 7), *rmsse(a, f, in, 7), 1e-12);
    EXPECT_NEAR(*sql(times(a, c), times(f, c), 0.3, times(in, c), 7), *sql(a, f, 0.3, in, 7), 1e-12);
  }
}

TEST(Metrics, SmqlIsMeanOfComponents) {
  Rng rng(7);
  const auto levels = QuantileLevels::standard().values();
  Vec in(50), a(6), block(6 * levels.size());
  for (double& v : in) v = rng.uniform(0, 20);
  for (double& v : a) v = rng.uniform(0, 20);
  for (double& v : block) v = rng.uniform(0, 20);
  double mean = 0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    Vec col;
    for (std::size_t t = 0; t < a.size(); ++t) col.push_back(block[t * levels.size() + l]);
    mean += *sql(a, col, levels[l], in, 7);
  }
  mean /= static_cast<double>(levels.size());
  EXPECT_NEAR(*smql(a, block, levels, in, 7), mean, 1e-12);
}

TEST(Metrics, SmqlOfTwoLevels) {
  // Scale 1; q=0.5 loss 1.0 and q=0.75 loss 3.0.
  const Vec in{0, 1, 2}, a{10}, block{8, 6};
  const Vec levels{0.5, 0.75};
  EXPECT_NEAR(*sql(a, Vec{8}, 0.5, in, 1), 1.0, 1e-12);
  EXPECT_NEAR(*sql(a, Vec{6}, 0.75, in, 1), 3.0, 1e-12);
  EXPECT_NEAR(*smql(a, block, levels, in, 1), 2.0, 1e-12);
  const Vec perfect{10, 10};
  EXPECT_EQ(*smql(a, perfect, levels, in, 1), 0.0);
}

TEST(Metrics, ZeroScaleIsExcludedNotClamped) {
  const Vec flat{3, 3, 3, 3};
  EXPECT_FALSE(rmsse(Vec{1}, Vec{2}, flat, 1).has_value());
  EXPECT_FALSE(sql(Vec{1}, Vec{2}, 0.5, flat, 1).has_value());
  EXPECT_THROW(rmsse(Vec{1}, Vec{2}, Vec{1, 2}, 2), Error);
}

TEST(Metrics, AggregateMeansAndExclusions) {
  const std::optional<double> one[] = {0.42};
  EXPECT_EQ(aggregate(one).value, 0.42);
  const std::optional<double> two[] = {0.6, 0.8};
  EXPECT_NEAR(aggregate(two).value, 0.7, 1e-15);
  const std::optional<double> with_gap[] = {0.6, std::nullopt, 0.8};
  const auto g = aggregate(with_gap);
  EXPECT_NEAR(g.value, 0.7, 1e-15);
  EXPECT_EQ(g.count, 2u);
  EXPECT_EQ(g.excluded, 1u);
  const std::optional<double> none[] = {std::nullopt};
  EXPECT_THROW(aggregate(none), Error);
}

TEST(Metrics, NormalizeToBaseline) {
  const MetricRow rows[] = {{"Ens2A", 7, 59846}, {"Ens2A", 14, 32015}, {"LR", 7, 0.76}, {"LR", 14, 0.76}};
  const auto rel = normalize_to_baseline(rows, 7);
  EXPECT_EQ(rel[0], 1.0);
  EXPECT_NEAR(rel[1], 0.535, 0.0005);
  EXPECT_EQ(rel[2], 1.0);
  EXPECT_EQ(rel[3], 1.0);
  const MetricRow missing[] = {{"A", 14, 1.0}};
  EXPECT_THROW(normalize_to_baseline(missing, 7), Error);
  const MetricRow zero[] = {{"A", 7, 0.0}, {"A", 14, 1.0}};
  EXPECT_THROW(normalize_to_baseline(zero, 7), Error);
}

TEST(Metrics, SeasonalNaiveRmsseNearOneOnStationarySeasonalData) {
  Rng rng(2024);
  const std::size_t series = 250, n = 200, h = 7, s = 7;
  std::vector<std::optional<double>> cells;
  for (std::size_t i = 0; i < series; ++i) {
    const double level = rng.uniform(10, 50), amp = rng.uniform(1, 5);
    Vec y(n + h);
    for (std::size_t t = 0; t < y.size(); ++t)
      y[t] = level + amp * std::sin(2 * 3.141592653589793 * static_cast<double>(t % 7) / 7.0) + rng.normal();
    const Vec in(y.begin(), y.begin() + n), a(y.begin() + n, y.end());
    Vec f(h);
    for (std::size_t k = 0; k < h; ++k) f[k] = in[n - s + k % s];
    cells.push_back(rmsse(a, f, in, s));
  }
  EXPECT_NEAR(aggregate(cells).value, 1.0, 0.15);
}

TEST(Metrics, ScaleTableMatchesDirectScales) {
  Rng rng(1);
  std::vector<double> y(60);
  for (double& v : y) v = rng.uniform(0, 9);
  const auto panel = test::make_panel({y});
  const ScaleTable st(panel, 7);
  for (std::size_t n : {8u, 20u, 60u}) {
    const std::span<const double> in(y.data(), n);
    EXPECT_NEAR(st.squared(0, n), squared_scale(in, 7), 1e-12);
    EXPECT_NEAR(st.absolute(0, n), absolute_scale(in, 7), 1e-12);
  }
}
