#pragma once

// Supervised-learning matrices for global models: lags, trailing rolling means, expanding mean,
// calendar fields, static attributes and exogenous passthrough.

#include <algorithm>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/core.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

enum class StaticEncoding { ordinal, one_hot };

struct CalendarSet {
  bool year = false;
  bool month = false;
  bool week = false;
  bool day_of_week = false;
};

struct FeatureConfig {
  std::vector<int> lags;
  std::vector<int> rolling_windows;
  bool expanding_mean = true;
  CalendarSet calendar;
  StaticEncoding static_encoding = StaticEncoding::ordinal;
  std::vector<std::string> exogenous;

  // Observations consumed before the first complete row.
  std::size_t warmup() const {
    int w = expanding_mean ? 1 : 0;
    for (int l : lags) w = std::max(w, l);
    for (int r : rolling_windows) w = std::max(w, r);
    return static_cast<std::size_t>(std::max(w, 1));
  }

  void validate() const {
    for (int l : lags)
      if (l < 1) throw Error("FeatureConfig: lag offsets must be positive");
    for (int r : rolling_windows)
      if (r < 1) throw Error("FeatureConfig: rolling windows must be positive");
  }

  // max lag + max window must fit strictly inside the shortest training slice.
  void validate_against(std::size_t shortest_training_length) const {
    validate();
    int max_lag = 0, max_win = 0;
    for (int l : lags) max_lag = std::max(max_lag, l);
    for (int r : rolling_windows) max_win = std::max(max_win, r);
    if (static_cast<std::size_t>(max_lag + max_win) >= shortest_training_length)
      throw Error("FeatureConfig: max lag + max rolling window (" + std::to_string(max_lag + max_win) +
                  ") must be below the shortest training slice (" + std::to_string(shortest_training_length) + ")");
  }
};

// Lags {1, 2, f, 2f}, rolling window {f}, expanding mean, day-of-week and month for daily data.
inline FeatureConfig default_feature_config(int frequency) {
  FeatureConfig cfg;
  std::set<int> lags{1, 2, frequency, 2 * frequency};
  cfg.lags.assign(lags.begin(), lags.end());
  cfg.rolling_windows = {frequency};
  cfg.expanding_mean = true;
  if (frequency == 7) {
    cfg.calendar.day_of_week = true;
    cfg.calendar.month = true;
  } else {
    cfg.calendar.week = true;
  }
  return cfg;
}

struct RowKey {
  std::size_t series = 0;
  std::size_t t = 0;
  friend bool operator==(const RowKey&, const RowKey&) = default;
};

struct FeatureMatrix {
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<double> x;  // row-major, rows x columns.size()
  std::vector<double> y;
  std::vector<RowKey> keys;

  std::size_t cols() const { return columns.size(); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(x).subspan(r * cols(), cols());
  }
};

// Series values up to `origin` are actuals; positions past it come from `predicted`.
class History {
 public:
  History(const Series& s, std::size_t origin, std::span<const double> predicted = {})
      : s_(&s), origin_(origin), predicted_(predicted) {}

  double at(std::size_t i) const {
    if (i < origin_) return s_->values[i];
    const std::size_t k = i - origin_;
    if (k >= predicted_.size())
      throw Error("feature: position " + std::to_string(i) + " of series '" + s_->id +
                  "' needs a prior prediction for step " + std::to_string(k + 1));
    return predicted_[k];
  }

  // Sum over [a, b).
  double sum(std::size_t a, std::size_t b) const {
    const std::size_t split = std::min(b, origin_);
    double total = a < split ? s_->cumsum[split] - s_->cumsum[a] : 0.0;
    for (std::size_t i = std::max(a, origin_); i < b; ++i) total += at(i);
    return total;
  }

 private:
  const Series* s_;
  std::size_t origin_;
  std::span<const double> predicted_;
};

class FeatureBuilder {
 public:
  FeatureBuilder(const SeriesPanel& panel, FeatureConfig config) : panel_(&panel), config_(std::move(config)) {
    config_.validate();
    warmup_ = config_.warmup();
    for (int l : config_.lags) columns_.push_back("lag" + std::to_string(l));
    for (int w : config_.rolling_windows) columns_.push_back("rollmean" + std::to_string(w));
    if (config_.expanding_mean) columns_.push_back("expmean");
    if (config_.calendar.year) columns_.push_back("year");
    if (config_.calendar.month) columns_.push_back("month");
    if (config_.calendar.week) columns_.push_back("week");
    if (config_.calendar.day_of_week) columns_.push_back("day_of_week");

    static_labels_.resize(panel.static_names.size());
    for (std::size_t a = 0; a < panel.static_names.size(); ++a) {
      std::set<std::string> distinct;
      for (const auto& s : panel.series) distinct.insert(s.statics[a]);
      static_labels_[a].assign(distinct.begin(), distinct.end());
      if (config_.static_encoding == StaticEncoding::ordinal) {
        columns_.push_back(panel.static_names[a]);
      } else {
        // First label is the reference level.
        for (std::size_t k = 1; k < static_labels_[a].size(); ++k)
          columns_.push_back(panel.static_names[a] + "=" + static_labels_[a][k]);
      }
    }
    static_codes_.resize(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i)
      for (std::size_t a = 0; a < panel.static_names.size(); ++a) {
        const auto& labels = static_labels_[a];
        auto code = static_cast<std::size_t>(
            std::lower_bound(labels.begin(), labels.end(), panel.series[i].statics[a]) - labels.begin());
        if (config_.static_encoding == StaticEncoding::ordinal) {
          static_codes_[i].push_back(static_cast<double>(code));
        } else {
          for (std::size_t k = 1; k < labels.size(); ++k) static_codes_[i].push_back(k == code ? 1.0 : 0.0);
        }
      }

    for (const auto& name : config_.exogenous) {
      auto it = std::find(panel.exogenous_names.begin(), panel.exogenous_names.end(), name);
      if (it == panel.exogenous_names.end()) throw Error("FeatureConfig: unknown exogenous column '" + name + "'");
      exog_index_.push_back(static_cast<std::size_t>(it - panel.exogenous_names.begin()));
      columns_.push_back(name);
    }
  }

  const FeatureConfig& config() const { return config_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t width() const { return columns_.size(); }
  std::size_t warmup() const { return warmup_; }
  const SeriesPanel& panel() const { return *panel_; }

  FeatureMatrix build(const PanelSlice& slice) const {
    check_panel(slice);
    FeatureMatrix m;
    m.columns = columns_;
    std::size_t total = 0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
      if (slice.length(i) <= warmup_)
        throw Error("build_features: series '" + slice.series(i).id + "' has " + std::to_string(slice.length(i)) +
                    " observations, warm-up needs more than " + std::to_string(warmup_));
      total += slice.length(i) - warmup_;
    }
    m.rows = total;
    m.x.resize(total * width());
    m.y.reserve(total);
    m.keys.reserve(total);
    std::size_t r = 0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
      const History hist(slice.series(i), slice.end(i));
      for (std::size_t t = slice.begin(i) + warmup_; t < slice.end(i); ++t, ++r) {
        fill_row(i, slice.begin(i), t, hist, std::span<double>(m.x).subspan(r * width(), width()));
        m.y.push_back(slice.series(i).values[t]);
        m.keys.push_back({i, t});
      }
    }
    return m;
  }

  // Features for target position end(i) + step - 1, using actuals before end(i) and `prior`
  // predictions (steps 1..step-1) after it.
  void horizon_row(const PanelSlice& slice, std::size_t i, std::size_t step, std::span<const double> prior,
                   std::span<double> out) const {
    check_panel(slice);
    if (step < 1) throw Error("feature_row_for_horizon: step must be >= 1");
    if (slice.length(i) < warmup_)
      throw Error("feature_row_for_horizon: series '" + slice.series(i).id + "' has insufficient history");
    if (out.size() != width()) throw Error("feature_row_for_horizon: output width mismatch");
    const History hist(slice.series(i), slice.end(i), prior.first(std::min(prior.size(), step - 1)));
    fill_row(i, slice.begin(i), slice.end(i) + step - 1, hist, out);
  }

 private:
  void check_panel(const PanelSlice& slice) const {
    if (&slice.panel() != panel_) throw Error("FeatureBuilder: slice belongs to a different panel");
  }

  void fill_row(std::size_t i, std::size_t begin, std::size_t t, const History& hist, std::span<double> out) const {
    std::size_t c = 0;
    for (int l : config_.lags) out[c++] = hist.at(t - static_cast<std::size_t>(l));
    for (int w : config_.rolling_windows) out[c++] = hist.sum(t - static_cast<std::size_t>(w), t) / w;
    if (config_.expanding_mean) out[c++] = hist.sum(begin, t) / static_cast<double>(t - begin);
    const auto& cal = config_.calendar;
    if (cal.year || cal.month || cal.week || cal.day_of_week) {
      const CalendarFields f = calendar_fields(panel_->date_at(i, t));
      if (cal.year) out[c++] = f.year;
      if (cal.month) out[c++] = f.month;
      if (cal.week) out[c++] = f.iso_week;
      if (cal.day_of_week) out[c++] = f.day_of_week;
    }
    for (double v : static_codes_[i]) out[c++] = v;
    const auto& s = panel_->series[i];
    for (std::size_t k : exog_index_) {
      if (t >= s.size())
        throw Error("feature: exogenous '" + panel_->exogenous_names[k] + "' unavailable past the end of series '" +
                    s.id + "'");
      out[c++] = s.exogenous[k][t];
    }
  }

  const SeriesPanel* panel_;
  FeatureConfig config_;
  std::size_t warmup_ = 1;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> static_labels_;
  std::vector<std::vector<double>> static_codes_;
  std::vector<std::size_t> exog_index_;
};

inline FeatureMatrix build_features(const PanelSlice& slice, const FeatureConfig& config) {
  return FeatureBuilder(slice.panel(), config).build(slice);
}

inline std::vector<double> feature_row_for_horizon(const PanelSlice& slice, const FeatureConfig& config,
                                                   std::size_t series_index, std::size_t step,
                                                   std::span<const double> prior) {
  FeatureBuilder builder(slice.panel(), config);
  std::vector<double> row(builder.width());
  builder.horizon_row(slice, series_index, step, prior, row);
  return row;
}

}  // namespace retrainbench
