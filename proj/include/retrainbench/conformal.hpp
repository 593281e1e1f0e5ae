#pragma once

// Split-conformal quantile forecasts: absolute residuals from a held-out tail of the training
// window, pooled across series per horizon step, turned into symmetric intervals around the point
// forecast.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/core.hpp"
#include "retrainbench/features.hpp"
#include "retrainbench/models.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

class QuantileLevels {
 public:
  QuantileLevels() = default;
  explicit QuantileLevels(std::vector<double> levels) : levels_(std::move(levels)) {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) throw Error("quantile levels must lie in (0, 1)");
      if (i > 0 && !(levels_[i] > levels_[i - 1])) throw Error("quantile levels must be strictly increasing");
    }
  }

  // 14 levels giving the 50, 60, 70, 80, 90, 95 and 99% central intervals.
  static QuantileLevels standard() {
    return QuantileLevels({0.005, 0.025, 0.05, 0.1, 0.15, 0.2, 0.25, 0.75, 0.8, 0.85, 0.9, 0.95, 0.975, 0.995});
  }

  bool symmetric() const {
    for (std::size_t i = 0, j = levels_.size(); i < j--; ++i)
      if (std::abs(levels_[i] + levels_[j] - 1.0) > 1e-9) return false;
    return true;
  }

  // Central coverages 1 - 2q for the lower half, ascending.
  std::vector<double> interval_coverages() const {
    std::vector<double> out;
    for (double q : levels_)
      if (q < 0.5 - 1e-12) out.push_back(1.0 - 2.0 * q);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t size() const { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }
  const std::vector<double>& values() const { return levels_; }
  friend bool operator==(const QuantileLevels&, const QuantileLevels&) = default;

 private:
  std::vector<double> levels_;
};

class ConformalCalibration {
 public:
  ConformalCalibration() = default;

  // scores[s] holds the pooled absolute residuals for horizon step s + 1.
  ConformalCalibration(std::vector<std::vector<double>> scores, std::size_t calibration_length)
      : scores_(std::move(scores)), calibration_length_(calibration_length) {
    for (auto& step : scores_) {
      for (double v : step)
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error("conformal: scores must be finite and nonnegative");
      std::sort(step.begin(), step.end());
    }
  }

  std::size_t horizon() const { return scores_.size(); }
  std::size_t calibration_length() const { return calibration_length_; }
  std::size_t score_count(std::size_t step) const { return scores_[step].size(); }

  // Order statistic ceil((m + 1) * coverage), clipped to [1, m]. `step` is 0-based.
  double score_quantile(std::size_t step, double coverage) const {
    const auto& s = scores_.at(step);
    if (s.empty()) throw Error("conformal: no calibration scores for step " + std::to_string(step + 1));
    if (coverage <= 0.0) return 0.0;
    const double m = static_cast<double>(s.size());
    auto k = static_cast<std::size_t>(std::ceil((m + 1.0) * coverage - 1e-9));
    k = std::clamp<std::size_t>(k, 1, s.size());
    return s[k - 1];
  }

  std::vector<std::string> warnings;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;

 private:
  std::vector<std::vector<double>> scores_;
  std::size_t calibration_length_ = 0;
};

// Point value plus one value per level, row-major [series][step][level].
struct QuantileForecast {
  std::size_t series = 0;
  std::size_t horizon = 0;
  QuantileLevels levels;
  std::vector<double> point;
  std::vector<double> values;

  double point_at(std::size_t i, std::size_t s) const { return point[i * horizon + s]; }
  double at(std::size_t i, std::size_t s, std::size_t l) const { return values[(i * horizon + s) * levels.size() + l]; }
  double& at(std::size_t i, std::size_t s, std::size_t l) { return values[(i * horizon + s) * levels.size() + l]; }
  std::span<const double> cell(std::size_t i, std::size_t s) const {
    return std::span<const double>(values).subspan((i * horizon + s) * levels.size(), levels.size());
  }
};

inline constexpr std::size_t min_scores_per_step = 30;

// Holds out the last c*h observations of `train`, fits on the rest, and collects absolute
// residuals from rolling h-step forecasts over the held-out span.
inline ConformalCalibration calibrate(const ModelSpec& spec, const FeatureBuilder& features, const PanelSlice& train,
                                      std::size_t horizon, std::size_t multiple) {
  if (horizon == 0) throw Error("calibrate: horizon must be >= 1");
  if (multiple < 2) throw Error("calibrate: calibration window must be at least twice the horizon (c >= 2)");
  const std::size_t window = multiple * horizon;
  const std::size_t needed = features.warmup() + window + horizon;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.length(i) < needed)
      throw Error("calibrate: series '" + train.series(i).id + "' has " + std::to_string(train.length(i)) +
                  " observations, calibration needs " + std::to_string(needed));

  const PanelSlice fit_slice = train.truncated(window);
  const FittedModel model = fit(spec, features.build(fit_slice));

  std::vector<std::vector<double>> scores(horizon);
  double predict_seconds = 0.0;
  std::vector<std::size_t> begins(train.size()), ends(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) begins[i] = train.begin(i);
  for (std::size_t o = 0; o + horizon <= window; ++o) {
    for (std::size_t i = 0; i < train.size(); ++i) ends[i] = fit_slice.end(i) + o;
    const PanelSlice at_origin(train.panel(), begins, ends);
    const PointForecast fc = predict(model, features, at_origin, horizon);
    predict_seconds += fc.predict_seconds;
    for (std::size_t i = 0; i < train.size(); ++i)
      for (std::size_t s = 0; s < horizon; ++s)
        scores[s].push_back(std::abs(train.series(i).values[ends[i] + s] - fc.at(i, s)));
  }

  ConformalCalibration cal(std::move(scores), window);
  cal.fit_seconds = model.fit_seconds;
  cal.predict_seconds = predict_seconds;
  for (std::size_t s = 0; s < horizon; ++s)
    if (cal.score_count(s) < min_scores_per_step)
      cal.warnings.push_back("conformal: only " + std::to_string(cal.score_count(s)) +
                             " pooled scores at step " + std::to_string(s + 1));
  return cal;
}

// Level q < 0.5 maps to point - Q(1 - 2q); q > 0.5 to point + Q(2q - 1); q = 0.5 to the point.
inline QuantileForecast quantile_forecast(const PointForecast& points, const ConformalCalibration& calibration,
                                          const QuantileLevels& levels) {
  if (!levels.symmetric()) throw Error("quantile_forecast: level set must be symmetric about 0.5");
  if (calibration.horizon() < points.horizon)
    throw Error("quantile_forecast: calibration covers " + std::to_string(calibration.horizon()) +
                " steps, forecast has " + std::to_string(points.horizon));
  QuantileForecast out;
  out.series = points.series;
  out.horizon = points.horizon;
  out.levels = levels;
  out.point = points.values;
  out.values.resize(points.values.size() * levels.size());
  std::vector<double> offsets(levels.size());
  for (std::size_t s = 0; s < points.horizon; ++s) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double q = levels[l];
      if (std::abs(q - 0.5) < 1e-12)
        offsets[l] = 0.0;
      else if (q < 0.5)
        offsets[l] = -calibration.score_quantile(s, 1.0 - 2.0 * q);
      else
        offsets[l] = calibration.score_quantile(s, 2.0 * q - 1.0);
    }
    for (std::size_t i = 0; i < points.series; ++i)
      for (std::size_t l = 0; l < levels.size(); ++l) out.at(i, s, l) = points.at(i, s) + offsets[l];
  }
  return out;
}

}  // namespace retrainbench
