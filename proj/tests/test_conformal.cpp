#include <gtest/gtest.h>

#include <cmath>

#include "retrainbench/conformal.hpp"
#include "retrainbench/synth.hpp"
#include "test_support.hpp"

using namespace retrainbench;

namespace {

ModelSpec snaive(int period) {
  ModelSpec s;
  s.name = "snaive";
  s.kind = ModelKind::seasonal_naive;
  s.hyperparameters = {{"period", period}};
  return s;
}

// Conservative order statistic.
double oracle_quantile(std::vector<double> scores, double coverage) {
  std::sort(scores.begin(), scores.end());
  const double m = static_cast<double>(scores.size());
  long k = static_cast<long>(std::ceil((m + 1) * coverage - 1e-9));
  if (k < 1) k = 1;
  if (k > static_cast<long>(scores.size())) k = static_cast<long>(scores.size());
  return scores[static_cast<std::size_t>(k - 1)];
}

PointForecast points_of(std::vector<double> v, std::size_t series, std::size_t horizon) {
  PointForecast p;
  p.series = series;
  p.horizon = horizon;
  p.values = std::move(v);
  return p;
}

}  // namespace

TEST(Conformal, StandardLevelsGiveSevenIntervals) {
  const auto levels = QuantileLevels::standard();
  EXPECT_EQ(levels.size(), 14u);
  EXPECT_TRUE(levels.symmetric());
  const auto cov = levels.interval_coverages();
  const std::vector<double> expected{0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  ASSERT_EQ(cov.size(), expected.size());
  for (std::size_t k = 0; k < cov.size(); ++k) EXPECT_NEAR(cov[k], expected[k], 1e-12);
}

TEST(Conformal, LevelValidation) {
  EXPECT_THROW(QuantileLevels({0.1, 0.1}), Error);
  EXPECT_THROW(QuantileLevels({0.0, 0.5}), Error);
  EXPECT_FALSE(QuantileLevels({0.1, 0.8}).symmetric());
}

TEST(Conformal, DailyWindowIsFourHorizons) {
  SynthOptions opt;
  opt.series = 2;
  opt.length = 200;
  const auto panel = make_synthetic_panel(opt);
  const FeatureBuilder fb(panel, default_feature_config(7));
  const auto cal = calibrate(snaive(7), fb, slice_holdout(panel, 0), 28, 4);
  EXPECT_EQ(cal.calibration_length(), 112u);
  EXPECT_EQ(cal.horizon(), 28u);
  // Rolling origins 0..112-28 across 2 series.
  EXPECT_EQ(cal.score_count(0), 2u * 85u);
}

TEST(Conformal, WeeklyWindowIsTwoHorizons) {
  SynthOptions opt;
  opt.series = 3;
  opt.length = 200;
  opt.frequency = 52;
  const auto panel = make_synthetic_panel(opt);
  const FeatureBuilder fb(panel, default_feature_config(52));
  const auto cal = calibrate(snaive(52), fb, slice_holdout(panel, 0), 13, 2);
  EXPECT_EQ(cal.calibration_length(), 26u);
  EXPECT_EQ(cal.score_count(12), 3u * 14u);
  EXPECT_TRUE(cal.warnings.empty());
}

TEST(Conformal, FewScoresWarn) {
  const auto panel = test::make_panel({std::vector<double>(40, 1.0)});
  FeatureConfig cfg;
  cfg.lags = {1};
  cfg.expanding_mean = false;
  const FeatureBuilder fb(panel, cfg);
  const auto cal = calibrate(snaive(1), fb, slice_holdout(panel, 0), 2, 2);
  EXPECT_EQ(cal.score_count(0), 3u);
  EXPECT_EQ(cal.warnings.size(), 2u);
}

TEST(Conformal, PerfectModelHasZeroScores) {
  std::vector<double> y;
  for (int t = 0; t < 120; ++t) y.push_back(10 + (t % 7));
  const auto panel = test::make_panel({y, y});
  const FeatureBuilder fb(panel, default_feature_config(7));
  const auto cal = calibrate(snaive(7), fb, slice_holdout(panel, 0), 7, 4);
  for (std::size_t s = 0; s < 7; ++s)
    for (double cov : {0.5, 0.8, 0.99}) EXPECT_EQ(cal.score_quantile(s, cov), 0.0);
  const auto fc = quantile_forecast(points_of({1, 2, 3, 4, 5, 6, 7, 1, 2, 3, 4, 5, 6, 7}, 2, 7), cal,
                                    QuantileLevels::standard());
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t s = 0; s < 7; ++s)
      for (std::size_t l = 0; l < 14; ++l) EXPECT_EQ(fc.at(i, s, l), fc.point_at(i, s));
}

TEST(Conformal, SymmetricRuleGivesEightAndTwelve) {
  const std::vector<double> scores{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 2.0, 3.0};
  ASSERT_EQ(oracle_quantile(scores, 0.8), 2.0);
  const ConformalCalibration cal({scores}, 9);
  const auto fc = quantile_forecast(points_of({10}, 1, 1), cal, QuantileLevels({0.1, 0.5, 0.9}));
  EXPECT_DOUBLE_EQ(fc.at(0, 0, 0), 8.0);
  EXPECT_DOUBLE_EQ(fc.at(0, 0, 1), 10.0);
  EXPECT_DOUBLE_EQ(fc.at(0, 0, 2), 12.0);
}

TEST(Conformal, ScoreQuantileMatchesOrderStatisticOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(5 + rng.below(200));
    for (double& v : scores) v = std::abs(rng.normal());
    const ConformalCalibration cal({scores}, 10);
    for (double cov : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}) EXPECT_EQ(cal.score_quantile(0, cov), oracle_quantile(scores, cov));
  }
}

TEST(Conformal, WidthsAreMonotoneInCoverage) {
  Rng rng(3);
  std::vector<std::vector<double>> scores(5);
  for (auto& s : scores) {
    s.resize(60);
    for (double& v : s) v = std::exp(rng.normal());
  }
  const ConformalCalibration cal(scores, 20);
  std::vector<double> pts(3 * 5);
  for (double& p : pts) p = rng.uniform(0, 50);
  const auto levels = QuantileLevels::standard();
  const auto fc = quantile_forecast(points_of(pts, 3, 5), cal, levels);
  const std::size_t L = levels.size();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t s = 0; s < 5; ++s) {
      const auto cell = fc.cell(i, s);
      EXPECT_TRUE(std::is_sorted(cell.begin(), cell.end()));
      double prev = -1.0;
      for (std::size_t l = L / 2; l < L; ++l) {
        const double width = cell[l] - cell[L - 1 - l];
        EXPECT_GE(width, prev);
        prev = width;
      }
    }
}

TEST(Conformal, TranslationEquivariance) {
  SynthOptions opt;
  opt.series = 4;
  opt.length = 150;
  const auto panel = make_synthetic_panel(opt);
  SeriesPanel shifted = panel;
  const double c = 37.25;
  for (auto& s : shifted.series) {
    for (double& v : s.values) v += c;
    detail::finalize_series(s);
  }
  const auto levels = QuantileLevels::standard();
  for (auto kind : {ModelKind::seasonal_naive, ModelKind::pooled_linear}) {
    ModelSpec spec = snaive(7);
    spec.kind = kind;
    if (kind != ModelKind::seasonal_naive) spec.hyperparameters.clear();
    const FeatureBuilder fa(panel, default_feature_config(7)), fb(shifted, default_feature_config(7));
    const auto ta = slice_holdout(panel, 7), tb = slice_holdout(shifted, 7);
    const auto ca = calibrate(spec, fa, ta, 7, 4);
    const auto cb = calibrate(spec, fb, tb, 7, 4);
    const auto ma = fit(spec, fa.build(ta)), mb = fit(spec, fb.build(tb));
    const auto qa = quantile_forecast(predict(ma, fa, ta, 7), ca, levels);
    const auto qb = quantile_forecast(predict(mb, fb, tb, 7), cb, levels);
    for (std::size_t k = 0; k < qa.values.size(); ++k) EXPECT_NEAR(qb.values[k], qa.values[k] + c, 1e-6);
  }
}

TEST(Conformal, AsymmetricLevelsRejected) {
  const ConformalCalibration cal({{1.0, 2.0}}, 2);
  EXPECT_THROW(quantile_forecast(points_of({1}, 1, 1), cal, QuantileLevels({0.1, 0.5, 0.8})), Error);
}

TEST(Conformal, CalibrationPreconditions) {
  const auto panel = test::make_panel({std::vector<double>(30, 1.0)});
  const FeatureBuilder fb(panel, default_feature_config(7));
  EXPECT_THROW(calibrate(snaive(7), fb, slice_holdout(panel, 0), 7, 1), Error);
  // warm-up 14 + 4*7 + 7 = 49 > 30
  EXPECT_THROW(calibrate(snaive(7), fb, slice_holdout(panel, 0), 7, 4), Error);
  EXPECT_THROW(ConformalCalibration({{-1.0}}, 2), Error);
}
