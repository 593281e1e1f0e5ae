#pragma once

// Scaled accuracy metrics. Scales come from the in-sample seasonal-naive errors at lag s; a series
// whose scale is zero yields no value and is excluded from aggregation.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/core.hpp"

namespace retrainbench {

namespace detail {
inline void check_insample(std::span<const double> insample, std::size_t s) {
  if (s < 1) throw Error("metric: seasonal period must be >= 1");
  if (insample.size() <= s)
    throw Error("metric: in-sample length " + std::to_string(insample.size()) + " must exceed seasonal period " +
                std::to_string(s));
}
}  // namespace detail

// (1/(n-s)) * sum_{t>s} (y_t - y_{t-s})^2
inline double squared_scale(std::span<const double> insample, std::size_t s) {
  detail::check_insample(insample, s);
  double acc = 0.0;
  for (std::size_t t = s; t < insample.size(); ++t) {
    const double d = insample[t] - insample[t - s];
    acc += d * d;
  }
  return acc / static_cast<double>(insample.size() - s);
}

// (1/(n-s)) * sum_{t>s} |y_t - y_{t-s}|
inline double absolute_scale(std::span<const double> insample, std::size_t s) {
  detail::check_insample(insample, s);
  double acc = 0.0;
  for (std::size_t t = s; t < insample.size(); ++t) acc += std::abs(insample[t] - insample[t - s]);
  return acc / static_cast<double>(insample.size() - s);
}

inline double pinball(double actual, double forecast, double q) {
  return actual >= forecast ? q * (actual - forecast) : (1.0 - q) * (forecast - actual);
}

inline std::optional<double> rmsse_scaled(std::span<const double> actuals, std::span<const double> forecasts,
                                          double scale) {
  if (actuals.size() != forecasts.size() || actuals.empty()) throw Error("rmsse: actuals/forecasts size mismatch");
  if (!(scale > 0.0)) return std::nullopt;
  double mse = 0.0;
  for (std::size_t t = 0; t < actuals.size(); ++t) mse += (actuals[t] - forecasts[t]) * (actuals[t] - forecasts[t]);
  mse /= static_cast<double>(actuals.size());
  return std::sqrt(mse / scale);
}

inline std::optional<double> rmsse(std::span<const double> actuals, std::span<const double> forecasts,
                                   std::span<const double> insample, std::size_t s) {
  return rmsse_scaled(actuals, forecasts, squared_scale(insample, s));
}

// `stride` lets quantile values be read from an interleaved [step][level] layout.
inline std::optional<double> sql_scaled(std::span<const double> actuals, std::span<const double> quantile_values,
                                        double q, double scale, std::size_t stride = 1) {
  if (actuals.empty() || quantile_values.size() < (actuals.size() - 1) * stride + 1)
    throw Error("sql: actuals/quantile values size mismatch");
  if (!(q > 0.0 && q < 1.0)) throw Error("sql: level must lie in (0, 1)");
  if (!(scale > 0.0)) return std::nullopt;
  double loss = 0.0;
  for (std::size_t t = 0; t < actuals.size(); ++t) loss += pinball(actuals[t], quantile_values[t * stride], q);
  return loss / static_cast<double>(actuals.size()) / scale;
}

inline std::optional<double> sql(std::span<const double> actuals, std::span<const double> quantile_values, double q,
                                 std::span<const double> insample, std::size_t s) {
  if (actuals.size() != quantile_values.size()) throw Error("sql: actuals/quantile values size mismatch");
  return sql_scaled(actuals, quantile_values, q, absolute_scale(insample, s));
}

// `quantiles` is row-major [step][level] with one column per entry of `levels`.
inline std::optional<double> smql_scaled(std::span<const double> actuals, std::span<const double> quantiles,
                                         std::span<const double> levels, double scale) {
  if (levels.empty()) throw Error("smql: empty level set");
  if (quantiles.size() != actuals.size() * levels.size()) throw Error("smql: quantile matrix size mismatch");
  if (!(scale > 0.0)) return std::nullopt;
  double total = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l)
    total += *sql_scaled(actuals, quantiles.subspan(l), levels[l], scale, levels.size());
  return total / static_cast<double>(levels.size());
}

inline std::optional<double> smql(std::span<const double> actuals, std::span<const double> quantiles,
                                  std::span<const double> levels, std::span<const double> insample, std::size_t s) {
  return smql_scaled(actuals, quantiles, levels, absolute_scale(insample, s));
}

struct Aggregate {
  double value = 0.0;
  std::size_t count = 0;
  std::size_t excluded = 0;
};

// Unweighted mean over the values that are present.
inline Aggregate aggregate(std::span<const std::optional<double>> cells) {
  Aggregate a;
  double sum = 0.0;
  for (const auto& c : cells) {
    if (c) {
      sum += *c;
      ++a.count;
    } else {
      ++a.excluded;
    }
  }
  if (a.count == 0)
    throw Error("aggregate: all " + std::to_string(a.excluded) + " cells excluded (zero scale denominators)");
  a.value = sum / static_cast<double>(a.count);
  return a;
}

struct MetricRow {
  std::string method;
  std::size_t retrain = 0;
  double value = 0.0;
};

// value(method, r) / value(method, baseline) for every row.
inline std::vector<double> normalize_to_baseline(std::span<const MetricRow> rows, std::size_t baseline) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const MetricRow* base = nullptr;
    for (const auto& candidate : rows)
      if (candidate.method == row.method && candidate.retrain == baseline) {
        base = &candidate;
        break;
      }
    if (!base)
      throw Error("normalize_to_baseline: no baseline row r=" + std::to_string(baseline) + " for '" + row.method + "'");
    if (base->value == 0.0)
      throw Error("normalize_to_baseline: baseline value is 0 for '" + row.method + "'");
    out.push_back(row.value / base->value);
  }
  return out;
}

}  // namespace retrainbench
