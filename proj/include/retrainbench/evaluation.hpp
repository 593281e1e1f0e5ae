#pragma once

// Scores scenario forecasts cell by cell: one RMSSE and one SMQL value per (series, origin), each
// scaled by the series history observed at that origin.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "retrainbench/backtest.hpp"
#include "retrainbench/metrics.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

// Prefix sums of seasonal differences so the scale at any history length costs O(1).
class ScaleTable {
 public:
  ScaleTable(const SeriesPanel& panel, std::size_t s) : s_(s) {
    sq_.resize(panel.size());
    abs_.resize(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
      const auto& y = panel.series[i].values;
      sq_[i].assign(y.size() + 1, 0.0);
      abs_[i].assign(y.size() + 1, 0.0);
      for (std::size_t t = 0; t < y.size(); ++t) {
        const double d = t >= s ? y[t] - y[t - s] : 0.0;
        sq_[i][t + 1] = sq_[i][t] + d * d;
        abs_[i][t + 1] = abs_[i][t] + std::abs(d);
      }
    }
  }

  // Scales for the first `n` observations of series i.
  double squared(std::size_t i, std::size_t n) const {
    check(n);
    return sq_[i][n] / static_cast<double>(n - s_);
  }
  double absolute(std::size_t i, std::size_t n) const {
    check(n);
    return abs_[i][n] / static_cast<double>(n - s_);
  }

 private:
  void check(std::size_t n) const {
    if (n <= s_) throw Error("metric: in-sample length must exceed seasonal period");
  }
  std::size_t s_;
  std::vector<std::vector<double>> sq_, abs_;
};

struct ScenarioMetrics {
  std::string method;
  std::size_t retrain = 0;
  std::vector<std::string> members;
  Aggregate rmsse;
  Aggregate smql;
  CtLedger ledger;
  // Cell values [series][origin]; nullopt where the scale is zero.
  std::vector<std::optional<double>> rmsse_cells, smql_cells;
  // Per-series means over origins; NaN when every cell of the series was excluded.
  std::vector<double> rmsse_series, smql_series;
  std::size_t origins = 0;

  double ct() const { return ledger.total(); }
};

namespace detail {
inline std::vector<double> series_means(std::span<const std::optional<double>> cells, std::size_t series,
                                        std::size_t origins) {
  std::vector<double> out(series, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < series; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t o = 0; o < origins; ++o)
      if (const auto& c = cells[i * origins + o]) {
        sum += *c;
        ++n;
      }
    if (n > 0) out[i] = sum / static_cast<double>(n);
  }
  return out;
}
}  // namespace detail

inline ScenarioMetrics evaluate_scenario(const ScenarioResult& result, const SeriesPanel& panel, std::size_t s_point,
                                         std::size_t s_prob) {
  if (result.failed) throw Error("evaluate: scenario '" + result.method + "' failed: " + result.error);
  const ScaleTable point_scale(panel, s_point);
  const ScaleTable prob_scale(panel, s_prob);
  ScenarioMetrics m;
  m.method = result.method;
  m.retrain = result.retrain;
  m.members = result.members;
  m.ledger = result.ledger;
  m.origins = result.origins;
  m.rmsse_cells.reserve(result.series * result.origins);
  m.smql_cells.reserve(result.series * result.origins);
  const auto& levels = result.levels.values();
  for (std::size_t i = 0; i < result.series; ++i) {
    const std::size_t test_start = panel.series[i].size() - result.test_length;
    for (std::size_t o = 0; o < result.origins; ++o) {
      const std::size_t n = test_start + o;
      m.rmsse_cells.push_back(rmsse_scaled(result.actuals(i, o), result.points(i, o), point_scale.squared(i, n)));
      m.smql_cells.push_back(
          smql_scaled(result.actuals(i, o), result.quantile_block(i, o), levels, prob_scale.absolute(i, n)));
    }
  }
  m.rmsse = aggregate(m.rmsse_cells);
  m.smql = aggregate(m.smql_cells);
  m.rmsse_series = detail::series_means(m.rmsse_cells, result.series, result.origins);
  m.smql_series = detail::series_means(m.smql_cells, result.series, result.origins);
  return m;
}

// Share of (series, origin, step) cells whose actual lies inside the central interval of the given
// coverage, read from the matching level pair.
inline double interval_coverage(const ScenarioResult& result, double coverage) {
  const auto& lv = result.levels.values();
  const double lo_q = (1.0 - coverage) / 2.0, hi_q = 1.0 - lo_q;
  std::optional<std::size_t> lo, hi;
  for (std::size_t l = 0; l < lv.size(); ++l) {
    if (std::abs(lv[l] - lo_q) < 1e-9) lo = l;
    if (std::abs(lv[l] - hi_q) < 1e-9) hi = l;
  }
  if (!lo || !hi) throw Error("interval_coverage: level set has no " + format_double(coverage) + " interval");
  const std::size_t L = lv.size();
  std::size_t inside = 0;
  for (std::size_t c = 0; c < result.actual.size(); ++c) {
    const double y = result.actual[c];
    if (y >= result.quantiles[c * L + *lo] && y <= result.quantiles[c * L + *hi]) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(result.actual.size());
}

}  // namespace retrainbench
