#pragma once

// Long-format panel ingestion, validation, filtering and slicing.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "retrainbench/core.hpp"

namespace retrainbench {

struct PanelSchema {
  std::string id_column = "unique_id";
  std::string time_column = "ds";
  std::string value_column = "y";
  // Exogenous columns to keep from the main table. Empty means every other column.
  std::vector<std::string> exogenous;
};

struct Series {
  std::string id;
  std::vector<Date> dates;
  std::vector<double> values;
  std::vector<double> cumsum;                  // size n+1, cumsum[i] = sum of values[0, i)
  std::vector<std::vector<double>> exogenous;  // [column][t]
  std::vector<std::string> statics;            // aligned with SeriesPanel::static_names

  std::size_t size() const { return values.size(); }
};

class SeriesPanel {
 public:
  int frequency = 1;     // periods per seasonal cycle
  int spacing_days = 1;  // distance between consecutive timestamps
  std::vector<Series> series;
  std::vector<std::string> exogenous_names;
  // Category labels per exogenous column; empty for numeric columns. Code = index + 1, blank = 0.
  std::vector<std::vector<std::string>> exogenous_labels;
  std::vector<std::string> static_names;
  std::vector<std::string> warnings;

  std::size_t size() const { return series.size(); }
  bool empty() const { return series.empty(); }

  std::size_t shortest() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (const auto& s : series) m = std::min(m, s.size());
    return series.empty() ? 0 : m;
  }

  std::optional<std::size_t> find(std::string_view id) const {
    auto it = std::lower_bound(series.begin(), series.end(), id,
                               [](const Series& s, std::string_view key) { return s.id < key; });
    if (it == series.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - series.begin());
  }

  // Timestamp of position t (may lie past the last observation).
  Date date_at(std::size_t series_index, std::size_t t) const {
    const auto& s = series[series_index];
    return s.dates.front() + std::chrono::days{static_cast<long>(t) * spacing_days};
  }
};

namespace detail {

inline void finalize_series(Series& s) {
  s.cumsum.assign(s.values.size() + 1, 0.0);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.cumsum[i + 1] = s.cumsum[i] + s.values[i];
}

inline std::vector<std::string> sorted_labels(const std::vector<std::string>& raw) {
  std::set<std::string> distinct;
  for (const auto& v : raw)
    if (!v.empty()) distinct.insert(v);
  return {distinct.begin(), distinct.end()};
}

inline double label_code(const std::vector<std::string>& labels, const std::string& v) {
  if (v.empty()) return 0.0;
  auto it = std::lower_bound(labels.begin(), labels.end(), v);
  return static_cast<double>(it - labels.begin()) + 1.0;
}

}  // namespace detail

// Reads a long-format panel. Optional statics (keyed by id) and exogenous (keyed by id, time) tables
// use the same id/time column names as the main table.
inline SeriesPanel load_panel(std::istream& source, const PanelSchema& schema, int frequency,
                              std::istream* statics_source = nullptr, std::istream* exogenous_source = nullptr) {
  if (frequency < 1) throw Error("load_panel: frequency must be >= 1");
  const csv::Table table = csv::read(source);
  const auto id_col = table.column(schema.id_column);
  const auto ds_col = table.column(schema.time_column);
  const auto y_col = table.column(schema.value_column);
  if (!id_col || !ds_col || !y_col)
    throw Error("load_panel: missing required column (expected '" + schema.id_column + "', '" +
                schema.time_column + "', '" + schema.value_column + "')");

  std::vector<std::size_t> exog_cols;
  std::vector<std::string> exog_names;
  if (schema.exogenous.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (c != *id_col && c != *ds_col && c != *y_col) {
        exog_cols.push_back(c);
        exog_names.push_back(table.header[c]);
      }
  } else {
    for (const auto& name : schema.exogenous) {
      auto c = table.column(name);
      if (!c) throw Error("load_panel: exogenous column '" + name + "' not found");
      exog_cols.push_back(*c);
      exog_names.push_back(name);
    }
  }

  struct Row {
    Date date;
    double value;
    std::size_t row;
  };
  std::map<std::string, std::vector<Row>> grouped;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    auto date = parse_iso_date(fields[*ds_col]);
    if (!date) throw Error("load_panel: unparseable timestamp '" + fields[*ds_col] + "' at row " + std::to_string(r));
    auto value = parse_double(fields[*y_col]);
    if (!value || !std::isfinite(*value))
      throw Error("load_panel: unparseable value '" + fields[*y_col] + "' at row " + std::to_string(r));
    grouped[fields[*id_col]].push_back({*date, *value, r});
  }

  SeriesPanel panel;
  panel.frequency = frequency;
  panel.exogenous_names = exog_names;
  std::optional<long> spacing;

  // Raw exogenous strings per series, resolved into codes once labels are known.
  std::vector<std::vector<std::vector<std::string>>> raw_exog;
  std::vector<std::vector<std::string>> all_exog(exog_cols.size());

  for (auto& [id, rows] : grouped) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    Series s;
    s.id = id;
    std::vector<std::vector<std::string>> exog_strings(exog_cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) {
        const long gap = (rows[i].date - rows[i - 1].date).count();
        if (gap == 0)
          throw Error("load_panel: duplicate key (" + id + ", " + format_iso_date(rows[i].date) + ") at rows " +
                      std::to_string(rows[i - 1].row) + " and " + std::to_string(rows[i].row));
        if (!spacing) spacing = gap;
        if (gap != *spacing)
          throw Error("load_panel: irregular spacing in series '" + id + "': gap of " + std::to_string(gap) +
                      " days between " + format_iso_date(rows[i - 1].date) + " and " +
                      format_iso_date(rows[i].date) + " (expected " + std::to_string(*spacing) + ")");
      }
      if (rows[i].value < 0.0 && panel.warnings.size() < 100)
        panel.warnings.push_back("negative value in series '" + id + "' at " + format_iso_date(rows[i].date));
      s.dates.push_back(rows[i].date);
      s.values.push_back(rows[i].value);
      for (std::size_t c = 0; c < exog_cols.size(); ++c) {
        exog_strings[c].push_back(table.rows[rows[i].row][exog_cols[c]]);
        all_exog[c].push_back(exog_strings[c].back());
      }
    }
    panel.series.push_back(std::move(s));
    raw_exog.push_back(std::move(exog_strings));
  }
  if (panel.series.empty()) throw Error("load_panel: no rows");
  panel.spacing_days = static_cast<int>(spacing.value_or(1));

  if (exogenous_source) {
    const csv::Table ex = csv::read(*exogenous_source);
    const auto eid = ex.column(schema.id_column);
    const auto eds = ex.column(schema.time_column);
    if (!eid || !eds) throw Error("load_panel: exogenous table lacks id/time columns");
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < ex.header.size(); ++c)
      if (c != *eid && c != *eds) cols.push_back(c);
    std::map<std::pair<std::string, long>, std::size_t> index;
    for (std::size_t r = 0; r < ex.rows.size(); ++r) {
      auto date = parse_iso_date(ex.rows[r][*eds]);
      if (!date) throw Error("load_panel: unparseable exogenous timestamp at row " + std::to_string(r));
      auto key = std::make_pair(ex.rows[r][*eid], static_cast<long>(date->time_since_epoch().count()));
      if (!index.emplace(key, r).second)
        throw Error("load_panel: duplicate exogenous key (" + key.first + ", " + ex.rows[r][*eds] + ")");
    }
    const std::size_t base = exog_cols.size();
    all_exog.resize(base + cols.size());
    for (std::size_t c : cols) panel.exogenous_names.push_back(ex.header[c]);
    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const auto& s = panel.series[si];
      raw_exog[si].resize(base + cols.size());
      for (std::size_t t = 0; t < s.size(); ++t) {
        auto it = index.find({s.id, static_cast<long>(s.dates[t].time_since_epoch().count())});
        if (it == index.end())
          throw Error("load_panel: exogenous values missing for (" + s.id + ", " + format_iso_date(s.dates[t]) + ")");
        for (std::size_t k = 0; k < cols.size(); ++k) {
          raw_exog[si][base + k].push_back(ex.rows[it->second][cols[k]]);
          all_exog[base + k].push_back(raw_exog[si][base + k].back());
        }
      }
    }
  }

  // Numeric if every non-blank cell parses; otherwise ordinal codes over sorted labels.
  panel.exogenous_labels.resize(panel.exogenous_names.size());
  for (std::size_t c = 0; c < panel.exogenous_names.size(); ++c) {
    bool numeric = true;
    for (const auto& v : all_exog[c])
      if (!v.empty() && !parse_double(v)) {
        numeric = false;
        break;
      }
    if (!numeric) panel.exogenous_labels[c] = detail::sorted_labels(all_exog[c]);
    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      std::vector<double> column;
      column.reserve(raw_exog[si][c].size());
      for (const auto& v : raw_exog[si][c])
        column.push_back(numeric ? parse_double(v).value_or(0.0) : detail::label_code(panel.exogenous_labels[c], v));
      panel.series[si].exogenous.push_back(std::move(column));
    }
  }

  if (statics_source) {
    const csv::Table st = csv::read(*statics_source);
    const auto sid = st.column(schema.id_column);
    if (!sid) throw Error("load_panel: statics table lacks '" + schema.id_column + "' column");
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < st.header.size(); ++c)
      if (c != *sid) {
        cols.push_back(c);
        panel.static_names.push_back(st.header[c]);
      }
    std::unordered_map<std::string, std::size_t> rows;
    for (std::size_t r = 0; r < st.rows.size(); ++r)
      if (!rows.emplace(st.rows[r][*sid], r).second)
        throw Error("load_panel: duplicate statics row for '" + st.rows[r][*sid] + "'");
    for (auto& s : panel.series) {
      auto it = rows.find(s.id);
      if (it == rows.end()) throw Error("load_panel: no static attributes for series '" + s.id + "'");
      for (std::size_t c : cols) s.statics.push_back(st.rows[it->second][c]);
    }
  }

  for (auto& s : panel.series) detail::finalize_series(s);
  return panel;
}

// Writes the main long-format table (id, time, value, exogenous columns).
inline void write_panel(std::ostream& out, const SeriesPanel& panel, const PanelSchema& schema = {}) {
  out << csv::escape(schema.id_column) << ',' << csv::escape(schema.time_column) << ','
      << csv::escape(schema.value_column);
  for (const auto& name : panel.exogenous_names) out << ',' << csv::escape(name);
  out << '\n';
  for (const auto& s : panel.series)
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << csv::escape(s.id) << ',' << format_iso_date(s.dates[t]) << ',' << format_double(s.values[t]);
      for (std::size_t c = 0; c < panel.exogenous_names.size(); ++c) {
        const double v = s.exogenous[c][t];
        const auto& labels = panel.exogenous_labels[c];
        if (labels.empty())
          out << ',' << format_double(v);
        else
          out << ',' << (v == 0.0 ? std::string{} : csv::escape(labels[static_cast<std::size_t>(v) - 1]));
      }
      out << '\n';
    }
}

inline void write_statics(std::ostream& out, const SeriesPanel& panel, const PanelSchema& schema = {}) {
  out << csv::escape(schema.id_column);
  for (const auto& name : panel.static_names) out << ',' << csv::escape(name);
  out << '\n';
  for (const auto& s : panel.series) {
    out << csv::escape(s.id);
    for (const auto& v : s.statics) out << ',' << csv::escape(v);
    out << '\n';
  }
}

struct FilterResult {
  SeriesPanel panel;
  std::size_t dropped = 0;
};

// Keeps series with strictly more than min_obs observations.
inline FilterResult filter_min_length(const SeriesPanel& panel, std::size_t min_obs) {
  FilterResult result;
  result.panel = panel;
  result.panel.series.clear();
  for (const auto& s : panel.series) {
    if (min_obs == 0 || s.size() > min_obs)
      result.panel.series.push_back(s);
    else
      ++result.dropped;
  }
  if (result.panel.series.empty())
    throw Error("filter_min_length: no series survive filter (min_obs=" + std::to_string(min_obs) + ")");
  return result;
}

inline constexpr std::size_t default_min_obs(int frequency) { return frequency >= 52 ? 157 : 730; }

// Read-only view of a half-open [begin, end) window per series.
class PanelSlice {
 public:
  PanelSlice(const SeriesPanel& panel, std::vector<std::size_t> begin, std::vector<std::size_t> end)
      : panel_(&panel), begin_(std::move(begin)), end_(std::move(end)) {
    if (begin_.size() != panel.size() || end_.size() != panel.size())
      throw Error("PanelSlice: index vectors must have one entry per series");
    for (std::size_t i = 0; i < panel.size(); ++i)
      if (begin_[i] > end_[i] || end_[i] > panel.series[i].size())
        throw Error("PanelSlice: range [" + std::to_string(begin_[i]) + ", " + std::to_string(end_[i]) +
                    ") out of bounds for series '" + panel.series[i].id + "'");
  }

  const SeriesPanel& panel() const { return *panel_; }
  std::size_t size() const { return end_.size(); }
  std::size_t begin(std::size_t i) const { return begin_[i]; }
  std::size_t end(std::size_t i) const { return end_[i]; }
  std::size_t length(std::size_t i) const { return end_[i] - begin_[i]; }
  const Series& series(std::size_t i) const { return panel_->series[i]; }

  std::span<const double> values(std::size_t i) const {
    return std::span<const double>(panel_->series[i].values).subspan(begin_[i], length(i));
  }

  std::size_t shortest() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < size(); ++i) m = std::min(m, length(i));
    return size() == 0 ? 0 : m;
  }

  // Same begin, ends moved back by `amount` (used to carve out a hold-out span).
  PanelSlice truncated(std::size_t amount) const {
    std::vector<std::size_t> ends = end_;
    for (std::size_t i = 0; i < ends.size(); ++i) {
      if (length(i) < amount)
        throw Error("PanelSlice: series '" + series(i).id + "' too short to hold out " + std::to_string(amount));
      ends[i] -= amount;
    }
    return PanelSlice(*panel_, begin_, std::move(ends));
  }

 private:
  const SeriesPanel* panel_;
  std::vector<std::size_t> begin_;
  std::vector<std::size_t> end_;
};

// Slice ending at ends[i] per series. Without a length the window expands from the first observation.
inline PanelSlice slice(const SeriesPanel& panel, std::span<const std::size_t> ends,
                        std::optional<std::size_t> length = std::nullopt) {
  if (ends.size() != panel.size()) throw Error("slice: need one end index per series");
  std::vector<std::size_t> b(ends.size(), 0), e(ends.begin(), ends.end());
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (e[i] > panel.series[i].size())
      throw Error("slice: end index " + std::to_string(e[i]) + " out of range for series '" + panel.series[i].id +
                  "' (length " + std::to_string(panel.series[i].size()) + ")");
    if (length) {
      if (*length > e[i]) throw Error("slice: window length exceeds available history in '" + panel.series[i].id + "'");
      b[i] = e[i] - *length;
    }
  }
  return PanelSlice(panel, std::move(b), std::move(e));
}

// Expanding slice that holds out the last `holdout` observations of every series.
inline PanelSlice slice_holdout(const SeriesPanel& panel, std::size_t holdout) {
  std::vector<std::size_t> ends(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (panel.series[i].size() < holdout)
      throw Error("slice: series '" + panel.series[i].id + "' shorter than hold-out " + std::to_string(holdout));
    ends[i] = panel.series[i].size() - holdout;
  }
  return slice(panel, ends);
}

}  // namespace retrainbench
