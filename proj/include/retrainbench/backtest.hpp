#pragma once

// Rolling-origin evaluation with an expanding training window and a retraining schedule.
// Origin o (0-based) observes the first n_i - T + o values of every series and forecasts the next h;
// the model and its conformal calibration are re-estimated only at origins with o % r == 0.

#include <algorithm>
#include <cctype>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "retrainbench/conformal.hpp"
#include "retrainbench/core.hpp"
#include "retrainbench/ensemble.hpp"
#include "retrainbench/features.hpp"
#include "retrainbench/models.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

struct ScenarioConfig {
  std::size_t horizon = 28;
  std::size_t step = 1;
  std::size_t test_length = 364;
  std::size_t retrain = 7;
  int frequency = 7;
  std::size_t s_point = 1;
  std::size_t s_prob = 7;

  void validate() const {
    if (horizon < 1) throw Error("scenario: horizon must be >= 1");
    if (step != 1) throw Error("scenario: only step size 1 is supported");
    if (test_length < 1) throw Error("scenario: test length must be >= 1");
    if (retrain < 1) throw Error("scenario: retrain window must be >= 1");
    if (retrain > test_length)
      throw Error("scenario: retrain window " + std::to_string(retrain) + " exceeds test length " +
                  std::to_string(test_length));
    if (horizon > test_length)
      throw Error("scenario: horizon " + std::to_string(horizon) + " exceeds test length " + std::to_string(test_length));
    if (frequency < 1 || s_point < 1 || s_prob < 1) throw Error("scenario: periods must be >= 1");
  }
};

struct ScheduledOrigin {
  std::size_t offset = 0;
  bool fit = false;
};

struct RetrainSchedule {
  std::vector<ScheduledOrigin> origins;

  std::size_t size() const { return origins.size(); }
  std::size_t fit_count() const {
    return static_cast<std::size_t>(std::count_if(origins.begin(), origins.end(), [](auto& o) { return o.fit; }));
  }
};

inline RetrainSchedule make_schedule(const ScenarioConfig& config) {
  config.validate();
  RetrainSchedule schedule;
  const std::size_t count = config.test_length - config.horizon + 1;
  for (std::size_t i = 0; i < count; ++i) schedule.origins.push_back({i * config.step, i % config.retrain == 0});
  return schedule;
}

struct CtLedger {
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::size_t fit_count = 0;

  double total() const { return fit_seconds + predict_seconds; }
};

struct ConformalOptions {
  QuantileLevels levels = QuantileLevels::standard();
  std::size_t multiple = 4;
};

struct ScenarioResult {
  std::string method;
  std::size_t retrain = 0;
  std::vector<std::string> members;  // non-empty for ensembles
  std::size_t series = 0;
  std::size_t origins = 0;
  std::size_t horizon = 0;
  std::size_t test_length = 0;
  QuantileLevels levels;
  std::vector<double> point;      // [series][origin][step]
  std::vector<double> actual;     // [series][origin][step]
  std::vector<double> quantiles;  // [series][origin][step][level]
  CtLedger ledger;
  std::vector<std::string> warnings;
  std::size_t quantile_repairs = 0;
  bool failed = false;
  std::string error;
  std::optional<std::size_t> failed_origin;

  std::size_t index(std::size_t i, std::size_t o, std::size_t s) const { return (i * origins + o) * horizon + s; }
  std::span<const double> points(std::size_t i, std::size_t o) const {
    return std::span<const double>(point).subspan(index(i, o, 0), horizon);
  }
  std::span<const double> actuals(std::size_t i, std::size_t o) const {
    return std::span<const double>(actual).subspan(index(i, o, 0), horizon);
  }
  std::span<const double> quantile_block(std::size_t i, std::size_t o) const {
    return std::span<const double>(quantiles).subspan(index(i, o, 0) * levels.size(), horizon * levels.size());
  }
  bool is_ensemble() const { return !members.empty(); }
};

// Checks that the first origin leaves enough history for features and conformal calibration.
inline std::size_t required_history(const ScenarioConfig& config, const FeatureConfig& features,
                                    std::size_t conformal_multiple) {
  return config.test_length + features.warmup() + (conformal_multiple + 1) * config.horizon;
}

inline ScenarioResult run_scenario(const SeriesPanel& panel, ModelSpec spec, const FeatureConfig& features,
                                   const ScenarioConfig& config, const ConformalOptions& conformal, std::uint64_t seed) {
  const RetrainSchedule schedule = make_schedule(config);
  if (spec.kind == ModelKind::seasonal_naive && !spec.hyperparameters.count("period"))
    spec.hyperparameters["period"] = panel.frequency;
  spec.seed = seed;

  ScenarioResult result;
  result.method = spec.name;
  result.retrain = config.retrain;
  result.series = panel.size();
  result.origins = schedule.size();
  result.horizon = config.horizon;
  result.test_length = config.test_length;
  result.levels = conformal.levels;
  const std::size_t cells = result.series * result.origins * result.horizon;
  result.point.resize(cells);
  result.actual.resize(cells);
  result.quantiles.resize(cells * conformal.levels.size());

  for (const auto& s : panel.series)
    if (s.size() < config.test_length + 1)
      throw Error("run_scenario: series '" + s.id + "' is not longer than the test length");

  const FeatureBuilder builder(panel, features);
  std::optional<FittedModel> model;
  ConformalCalibration calibration;
  std::vector<std::size_t> ends(panel.size());
  const std::size_t L = conformal.levels.size();

  for (const auto& origin : schedule.origins) {
    const std::size_t o = origin.offset;
    try {
      for (std::size_t i = 0; i < panel.size(); ++i) ends[i] = panel.series[i].size() - config.test_length + o;
      const PanelSlice window = slice(panel, ends);
      if (origin.fit) {
        const auto start = std::chrono::steady_clock::now();
        calibration = calibrate(spec, builder, window, config.horizon, conformal.multiple);
        FittedModel fitted = fit(spec, builder.build(window));
        fitted.fit_origin = o;
        model = std::move(fitted);
        result.ledger.fit_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ++result.ledger.fit_count;
        for (auto& w : calibration.warnings)
          if (std::find(result.warnings.begin(), result.warnings.end(), w) == result.warnings.end())
            result.warnings.push_back(w);
      }
      const auto start = std::chrono::steady_clock::now();
      const PointForecast fc = predict(*model, builder, window, config.horizon);
      const QuantileForecast qf = quantile_forecast(fc, calibration, conformal.levels);
      result.ledger.predict_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      for (std::size_t i = 0; i < panel.size(); ++i)
        for (std::size_t s = 0; s < config.horizon; ++s) {
          const std::size_t idx = result.index(i, o, s);
          result.point[idx] = fc.at(i, s);
          result.actual[idx] = panel.series[i].values[ends[i] + s];
          for (std::size_t l = 0; l < L; ++l) result.quantiles[idx * L + l] = qf.at(i, s, l);
        }
    } catch (const std::exception& e) {
      result.failed = true;
      result.error = e.what();
      result.failed_origin = o;
      return result;
    }
  }
  return result;
}

// Combines cached member scenarios; the ensemble's CT is the sum of its members' CT.
inline ScenarioResult combine_scenarios(const std::string& name, std::span<const ScenarioResult* const> members) {
  if (members.size() < 2) throw Error("combine_scenarios: ensemble '" + name + "' needs at least 2 members");
  const ScenarioResult& first = *members.front();
  ScenarioResult out;
  out.method = name;
  out.retrain = first.retrain;
  out.series = first.series;
  out.origins = first.origins;
  out.horizon = first.horizon;
  out.test_length = first.test_length;
  out.levels = first.levels;
  for (const auto* m : members) {
    out.members.push_back(m->method);
    if (m->failed) {
      out.failed = true;
      out.error = "member '" + m->method + "' failed: " + m->error;
      out.failed_origin = m->failed_origin;
      return out;
    }
    if (m->retrain != first.retrain || m->series != first.series || m->origins != first.origins ||
        m->horizon != first.horizon || !(m->levels == first.levels))
      throw Error("combine_scenarios: member '" + m->method + "' is not aligned with '" + first.method + "'");
    out.ledger.fit_seconds += m->ledger.fit_seconds;
    out.ledger.predict_seconds += m->ledger.predict_seconds;
    out.ledger.fit_count += m->ledger.fit_count;
  }
  out.actual = first.actual;

  // Each (series, origin) block is combined through the forecast-level functions.
  const std::size_t L = out.levels.size();
  out.point.resize(first.point.size());
  out.quantiles.resize(first.quantiles.size());
  std::vector<QuantileForecast> blocks(members.size());
  std::vector<const QuantileForecast*> ptrs(members.size());
  for (std::size_t o = 0; o < out.origins; ++o) {
    for (std::size_t m = 0; m < members.size(); ++m) {
      auto& b = blocks[m];
      b.series = out.series;
      b.horizon = out.horizon;
      b.levels = out.levels;
      b.point.resize(out.series * out.horizon);
      b.values.resize(out.series * out.horizon * L);
      for (std::size_t i = 0; i < out.series; ++i) {
        std::copy_n(members[m]->point.begin() + static_cast<std::ptrdiff_t>(members[m]->index(i, o, 0)), out.horizon,
                    b.point.begin() + static_cast<std::ptrdiff_t>(i * out.horizon));
        std::copy_n(members[m]->quantiles.begin() + static_cast<std::ptrdiff_t>(members[m]->index(i, o, 0) * L),
                    out.horizon * L, b.values.begin() + static_cast<std::ptrdiff_t>(i * out.horizon * L));
      }
      ptrs[m] = &b;
    }
    const CombinedQuantiles combined = combine_quantiles(ptrs);
    out.quantile_repairs += combined.repaired_cells;
    for (std::size_t i = 0; i < out.series; ++i) {
      std::copy_n(combined.forecast.point.begin() + static_cast<std::ptrdiff_t>(i * out.horizon), out.horizon,
                  out.point.begin() + static_cast<std::ptrdiff_t>(out.index(i, o, 0)));
      std::copy_n(combined.forecast.values.begin() + static_cast<std::ptrdiff_t>(i * out.horizon * L),
                  out.horizon * L, out.quantiles.begin() + static_cast<std::ptrdiff_t>(out.index(i, o, 0) * L));
    }
  }
  if (out.quantile_repairs > 0)
    out.warnings.push_back("ensemble '" + name + "': " + std::to_string(out.quantile_repairs) +
                           " cells re-sorted after quantile crossing");
  return out;
}

class ResultStore {
 public:
  void add(ScenarioResult result) { results_.push_back(std::move(result)); }

  const ScenarioResult* find(const std::string& method, std::size_t retrain) const {
    for (const auto& r : results_)
      if (r.method == method && r.retrain == retrain) return &r;
    return nullptr;
  }

  const std::vector<ScenarioResult>& results() const { return results_; }
  std::size_t size() const { return results_.size(); }
  bool empty() const { return results_.empty(); }

  std::size_t succeeded() const {
    return static_cast<std::size_t>(std::count_if(results_.begin(), results_.end(), [](auto& r) { return !r.failed; }));
  }

 private:
  std::vector<ScenarioResult> results_;
};

struct GridOptions {
  ScenarioConfig scenario;  // retrain field is overridden per cell
  std::vector<std::size_t> retrain_set;
  FeatureConfig features;
  ConformalOptions conformal;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// One scenario per (model, r); cells are independent and may run on several workers. Results are
// stored in (model, r) order regardless of completion order.
inline ResultStore run_grid(const SeriesPanel& panel, const std::vector<ModelSpec>& specs, const GridOptions& options) {
  if (options.retrain_set.empty()) throw Error("run_grid: retrain set is empty");
  for (std::size_t r : options.retrain_set) {
    ScenarioConfig c = options.scenario;
    c.retrain = r;
    c.validate();
  }
  struct Cell {
    const ModelSpec* spec;
    std::size_t retrain;
  };
  std::vector<Cell> cells;
  for (const auto& spec : specs)
    for (std::size_t r : options.retrain_set) cells.push_back({&spec, r});
  std::vector<ScenarioResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      ScenarioConfig c = options.scenario;
      c.retrain = cells[k].retrain;
      try {
        results[k] = run_scenario(panel, *cells[k].spec, options.features, c, options.conformal, options.seed);
      } catch (const std::exception& e) {
        results[k].method = cells[k].spec->name;
        results[k].retrain = cells[k].retrain;
        results[k].failed = true;
        results[k].error = e.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, cells.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  ResultStore store;
  for (auto& r : results) store.add(std::move(r));
  return store;
}

// Adds one combined scenario per (ensemble, r) from cached member scenarios.
inline void add_ensembles(ResultStore& store, const std::vector<EnsembleSpec>& ensembles,
                          const std::vector<std::size_t>& retrain_set) {
  for (const auto& e : ensembles) {
    e.validate();
    for (std::size_t r : retrain_set) {
      std::vector<const ScenarioResult*> members;
      std::string missing;
      for (const auto& m : e.members) {
        const auto* found = store.find(m, r);
        if (!found) missing = m;
        members.push_back(found);
      }
      if (!missing.empty()) {
        ScenarioResult failed;
        failed.method = e.name;
        failed.retrain = r;
        failed.members = e.members;
        failed.failed = true;
        failed.error = "member '" + missing + "' has no scenario at r=" + std::to_string(r);
        store.add(std::move(failed));
        continue;
      }
      store.add(combine_scenarios(e.name, members));
    }
  }
}

inline std::string level_column(double q) { return "q" + format_double(q); }

inline std::string scenario_file_stem(const ScenarioResult& r) {
  std::string stem;
  for (char c : r.method) stem.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return stem + "__r" + std::to_string(r.retrain);
}

// forecasts/<method>__r<r>.csv and forecasts/<method>__r<r>.ct.json per successful scenario.
inline void write_store(const ResultStore& store, const SeriesPanel& panel, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& r : store.results()) {
    if (r.failed) continue;
    const auto stem = scenario_file_stem(r);
    {
      std::ofstream out(dir / (stem + ".csv"), std::ios::binary);
      if (!out) throw Error("write_store: cannot open " + (dir / (stem + ".csv")).string());
      out << "series_id,origin,step,actual,point";
      for (double q : r.levels.values()) out << ',' << level_column(q);
      out << '\n';
      const std::size_t L = r.levels.size();
      for (std::size_t i = 0; i < r.series; ++i)
        for (std::size_t o = 0; o < r.origins; ++o)
          for (std::size_t s = 0; s < r.horizon; ++s) {
            const std::size_t idx = r.index(i, o, s);
            out << csv::escape(panel.series[i].id) << ',' << o << ',' << (s + 1) << ',' << format_double(r.actual[idx])
                << ',' << format_double(r.point[idx]);
            for (std::size_t l = 0; l < L; ++l) out << ',' << format_double(r.quantiles[idx * L + l]);
            out << '\n';
          }
    }
    nlohmann::ordered_json ledger;
    ledger["method"] = r.method;
    ledger["retrain"] = r.retrain;
    ledger["fit_seconds"] = r.ledger.fit_seconds;
    ledger["predict_seconds"] = r.ledger.predict_seconds;
    ledger["fit_count"] = r.ledger.fit_count;
    if (r.is_ensemble()) ledger["members"] = r.members;
    std::ofstream(dir / (stem + ".ct.json")) << ledger.dump(2) << '\n';
  }
}

}  // namespace retrainbench
