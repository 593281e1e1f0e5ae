#pragma once

// End-to-end run: panel -> filters -> base-model grid -> leaderboard -> pool selection -> ensemble
// scenarios -> metrics -> baseline normalization -> rank tests -> cost, then report files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrainbench/backtest.hpp"
#include "retrainbench/config.hpp"
#include "retrainbench/cost.hpp"
#include "retrainbench/ensemble.hpp"
#include "retrainbench/evaluation.hpp"
#include "retrainbench/metrics.hpp"
#include "retrainbench/panel.hpp"
#include "retrainbench/stats.hpp"

namespace retrainbench {

struct RankTestRow {
  std::string method;
  std::string metric;
  FriedmanResult friedman;
  double critical_difference = 0.0;
  std::vector<Verdict> verdicts;
};

struct Report {
  std::vector<ScenarioMetrics> metrics;  // successful scenarios, base models first
  std::map<std::string, std::string> method_type;  // base / ENSACC / ENSTIME
  Leaderboard leaderboard;
  std::vector<EnsembleSpec> ensembles;
  std::vector<double> relative_rmsse, relative_smql, relative_ct;  // aligned with metrics
  std::vector<double> costs;                                       // aligned with metrics
  std::vector<RankTestRow> rank_tests;
  std::vector<std::size_t> retrain_set;
  std::size_t baseline = 0;
  std::vector<std::string> notes;

  const ScenarioMetrics* find(const std::string& method, std::size_t r) const {
    for (const auto& m : metrics)
      if (m.method == method && m.retrain == r) return &m;
    return nullptr;
  }
};

struct RunOutcome {
  int exit_code = 0;
  nlohmann::ordered_json summary;
  Report report;
};

using Logger = std::function<void(const std::string&)>;

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
  return out;
}

// Friedman over retrain scenarios for one method and metric. Blocks are series (or cells) with a
// value in every scenario.
inline std::optional<RankTestRow> rank_test(const Report& rep, const std::string& method, bool rmsse, double alpha,
                                            bool cell_blocking) {
  std::vector<const ScenarioMetrics*> cols;
  for (std::size_t r : rep.retrain_set) {
    const auto* m = rep.find(method, r);
    if (!m) return std::nullopt;
    cols.push_back(m);
  }
  if (cols.size() < 2) return std::nullopt;
  std::vector<double> values;
  std::size_t blocks = 0;
  if (cell_blocking) {
    const auto& ref = rmsse ? cols[0]->rmsse_cells : cols[0]->smql_cells;
    for (std::size_t c = 0; c < ref.size(); ++c) {
      bool complete = true;
      for (const auto* m : cols)
        if (!(rmsse ? m->rmsse_cells : m->smql_cells)[c]) complete = false;
      if (!complete) continue;
      for (const auto* m : cols) values.push_back(*(rmsse ? m->rmsse_cells : m->smql_cells)[c]);
      ++blocks;
    }
  } else {
    const std::size_t n = cols[0]->rmsse_series.size();
    for (std::size_t i = 0; i < n; ++i) {
      bool complete = true;
      for (const auto* m : cols)
        if (std::isnan((rmsse ? m->rmsse_series : m->smql_series)[i])) complete = false;
      if (!complete) continue;
      for (const auto* m : cols) values.push_back((rmsse ? m->rmsse_series : m->smql_series)[i]);
      ++blocks;
    }
  }
  if (blocks < 2 || cols.size() > 20) return std::nullopt;
  RankTestRow row;
  row.method = method;
  row.metric = rmsse ? "rmsse" : "smql";
  row.friedman = friedman(RankMatrix(blocks, cols.size(), std::move(values)));
  row.critical_difference = nemenyi_cd(cols.size(), blocks, alpha);
  const auto base_it = std::find(rep.retrain_set.begin(), rep.retrain_set.end(), rep.baseline);
  row.verdicts = compare_to_baseline(row.friedman.mean_ranks, row.critical_difference,
                                     static_cast<std::size_t>(base_it - rep.retrain_set.begin()));
  return row;
}

}  // namespace detail

inline Report build_report(const ResultStore& store, const SeriesPanel& panel, const RunConfig& config,
                           const std::map<std::string, std::string>& method_type,
                           const std::vector<EnsembleSpec>& ensembles, const Leaderboard& board) {
  if (store.succeeded() == 0) throw Error("report: no successful scenarios");
  Report rep;
  rep.method_type = method_type;
  rep.leaderboard = board;
  rep.ensembles = ensembles;
  rep.retrain_set = config.retrain_set;
  rep.baseline = config.baseline;
  for (const auto& r : store.results()) {
    if (r.failed) continue;
    try {
      rep.metrics.push_back(evaluate_scenario(r, panel, config.scenario.s_point, config.scenario.s_prob));
    } catch (const Error& e) {
      rep.notes.push_back("evaluation of " + r.method + " r=" + std::to_string(r.retrain) + " skipped: " + e.what());
    }
  }

  std::vector<MetricRow> rmsse_rows, smql_rows, ct_rows;
  for (const auto& m : rep.metrics) {
    rmsse_rows.push_back({m.method, m.retrain, m.rmsse.value});
    smql_rows.push_back({m.method, m.retrain, m.smql.value});
    ct_rows.push_back({m.method, m.retrain, m.ct()});
  }
  auto relative = [&](const std::vector<MetricRow>& rows, std::vector<double>& out, const char* metric) {
    out.assign(rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const MetricRow* base = nullptr;
      for (const auto& b : rows)
        if (b.method == rows[k].method && b.retrain == config.baseline) base = &b;
      if (!base) {
        if (rows[k].retrain == config.baseline || k == 0 || rows[k - 1].method != rows[k].method)
          rep.notes.push_back(std::string(metric) + ": no baseline scenario for '" + rows[k].method + "'");
        continue;
      }
      const MetricRow pair[] = {*base, rows[k]};
      try {
        out[k] = normalize_to_baseline(pair, config.baseline)[1];
      } catch (const Error& e) {
        rep.notes.push_back(e.what());
      }
    }
  };
  relative(rmsse_rows, rep.relative_rmsse, "rmsse");
  relative(smql_rows, rep.relative_smql, "smql");
  relative(ct_rows, rep.relative_ct, "ct");

  CostModel cost;
  cost.rate_per_hour = config.cost_rate;
  cost.dataset_series = static_cast<double>(panel.size());
  cost.target_series = config.cost_target_series > 0 ? config.cost_target_series : cost.dataset_series;
  for (const auto& m : rep.metrics) rep.costs.push_back(estimate_cost(m.ct(), cost));

  std::vector<std::string> methods;
  for (const auto& m : rep.metrics)
    if (std::find(methods.begin(), methods.end(), m.method) == methods.end()) methods.push_back(m.method);
  for (const auto& method : methods)
    for (bool rmsse : {true, false}) {
      if (auto row = detail::rank_test(rep, method, rmsse, config.alpha, config.cell_blocking))
        rep.rank_tests.push_back(std::move(*row));
      else if (rmsse)
        rep.notes.push_back("rank test skipped for '" + method + "' (needs every scenario and >= 2 blocks)");
    }
  return rep;
}

inline void write_report(const Report& rep, const std::filesystem::path& dir, double alpha) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "stats");
  auto type_of = [&](const std::string& m) {
    auto it = rep.method_type.find(m);
    return it == rep.method_type.end() ? std::string("base") : it->second;
  };
  auto num = [](double v) { return std::isnan(v) ? std::string{} : format_double(v); };

  {
    std::ofstream out(dir / "metrics.csv");
    out << "method,type,retrain,rmsse,smql,ct_seconds,fit_seconds,predict_seconds,fit_count,cells,rmsse_excluded,"
           "smql_excluded\n";
    for (const auto& m : rep.metrics)
      out << csv::escape(m.method) << ',' << type_of(m.method) << ',' << m.retrain << ',' << num(m.rmsse.value) << ','
          << num(m.smql.value) << ',' << num(m.ct()) << ',' << num(m.ledger.fit_seconds) << ','
          << num(m.ledger.predict_seconds) << ',' << m.ledger.fit_count << ','
          << (m.rmsse.count + m.rmsse.excluded) << ',' << m.rmsse.excluded << ',' << m.smql.excluded << '\n';
  }
  {
    std::ofstream out(dir / "relative_metrics.csv");
    out << "method,type,retrain,rmsse,smql,ct\n";
    for (std::size_t k = 0; k < rep.metrics.size(); ++k)
      out << csv::escape(rep.metrics[k].method) << ',' << type_of(rep.metrics[k].method) << ','
          << rep.metrics[k].retrain << ',' << num(rep.relative_rmsse[k]) << ',' << num(rep.relative_smql[k]) << ','
          << num(rep.relative_ct[k]) << '\n';
  }
  {
    std::ofstream out(dir / "costs.csv");
    out << "method,type,retrain,ct_seconds,cost\n";
    for (std::size_t k = 0; k < rep.metrics.size(); ++k)
      out << csv::escape(rep.metrics[k].method) << ',' << type_of(rep.metrics[k].method) << ','
          << rep.metrics[k].retrain << ',' << num(rep.metrics[k].ct()) << ',' << detail::fixed(rep.costs[k], 2) << '\n';
  }
  {
    std::ofstream out(dir / "plot_data.csv");
    out << "method,retrain,metric,value,relative_value\n";
    for (std::size_t k = 0; k < rep.metrics.size(); ++k) {
      const auto& m = rep.metrics[k];
      const std::string id = csv::escape(m.method) + ',' + std::to_string(m.retrain) + ',';
      out << id << "rmsse," << num(m.rmsse.value) << ',' << num(rep.relative_rmsse[k]) << '\n';
      out << id << "smql," << num(m.smql.value) << ',' << num(rep.relative_smql[k]) << '\n';
      out << id << "ct," << num(m.ct()) << ',' << num(rep.relative_ct[k]) << '\n';
      out << id << "cost," << num(rep.costs[k]) << ',' << num(rep.relative_ct[k]) << '\n';
    }
  }
  {
    std::ofstream out(dir / "leaderboard.csv");
    out << "model,rmsse,smql,ct_seconds\n";
    for (const auto& row : rep.leaderboard)
      out << csv::escape(row.model) << ',' << num(row.rmsse) << ',' << num(row.smql) << ',' << num(row.ct) << '\n';
  }
  {
    std::ofstream out(dir / "ensembles.csv");
    out << "ensemble,criterion,size,members\n";
    for (const auto& e : rep.ensembles)
      out << csv::escape(e.name) << ',' << to_string(e.criterion) << ',' << e.size() << ','
          << csv::escape(detail::join(e.members, ';')) << '\n';
  }
  {
    std::ofstream out(dir / "stats" / "friedman.csv");
    out << "method,metric,test,blocks,treatments,statistic,p_value,alpha,critical_difference\n";
    for (const auto& t : rep.rank_tests)
      out << csv::escape(t.method) << ',' << t.metric << ",friedman-chi2," << t.friedman.blocks << ','
          << t.friedman.treatments << ',' << num(t.friedman.statistic) << ',' << num(t.friedman.p_value) << ','
          << num(alpha) << ',' << num(t.critical_difference) << '\n';
  }
  {
    std::ofstream out(dir / "stats" / "cd_diagram.csv");
    out << "method,metric,retrain,mean_rank,critical_difference,is_baseline,verdict\n";
    for (const auto& t : rep.rank_tests)
      for (std::size_t j = 0; j < rep.retrain_set.size(); ++j)
        out << csv::escape(t.method) << ',' << t.metric << ',' << rep.retrain_set[j] << ','
            << num(t.friedman.mean_ranks[j]) << ',' << num(t.critical_difference) << ','
            << (rep.retrain_set[j] == rep.baseline ? 1 : 0) << ',' << to_string(t.verdicts[j]) << '\n';
  }
}

inline RunOutcome run_pipeline(const RunConfig& config, const Logger& log = {}) {
  namespace fs = std::filesystem;
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  RunOutcome outcome;
  auto& summary = outcome.summary;
  summary["status"] = "ok";
  summary["rank_test"] = "Friedman chi-square with tie correction (no Iman-Davenport refinement); Nemenyi CD";

  std::ifstream data(config.data_path);
  if (!data) throw Error("cannot open data file " + config.data_path.string());
  std::ifstream statics, exog;
  if (config.statics_path) {
    statics.open(*config.statics_path);
    if (!statics) throw Error("cannot open statics file " + config.statics_path->string());
  }
  if (config.exogenous_path) {
    exog.open(*config.exogenous_path);
    if (!exog) throw Error("cannot open exogenous file " + config.exogenous_path->string());
  }
  SeriesPanel panel = load_panel(data, config.schema, config.frequency, config.statics_path ? &statics : nullptr,
                                 config.exogenous_path ? &exog : nullptr);
  const std::size_t loaded = panel.size();
  say("loaded " + std::to_string(loaded) + " series");
  auto filtered = filter_min_length(panel, config.min_obs);
  std::size_t dropped_min = filtered.dropped, dropped_history = 0;
  panel = std::move(filtered.panel);
  if (config.history_filter) {
    const std::size_t need = required_history(config.scenario, config.features, config.conformal_multiple);
    auto f2 = filter_min_length(panel, need - 1);
    dropped_history = f2.dropped;
    panel = std::move(f2.panel);
  }
  summary["panel"] = {{"loaded", loaded},
                      {"dropped_min_obs", dropped_min},
                      {"dropped_history", dropped_history},
                      {"series", panel.size()},
                      {"warnings", panel.warnings}};
  say("filtered to " + std::to_string(panel.size()) + " series");

  // Shortest slice any model is trained on: the calibration fit at the first origin.
  config.features.validate_against(panel.shortest() - config.scenario.test_length -
                                   config.conformal_multiple * config.scenario.horizon);

  GridOptions grid;
  grid.scenario = config.scenario;
  grid.retrain_set = config.retrain_set;
  grid.features = config.features;
  grid.conformal.levels = config.levels;
  grid.conformal.multiple = config.conformal_multiple;
  grid.seed = config.seed;
  grid.workers = config.workers;
  if (const char* env = std::getenv("RETRAINBENCH_WORKERS")) {
    if (auto w = parse_double(env); w && *w >= 1) grid.workers = static_cast<std::size_t>(*w);
  }
  say("running " + std::to_string(config.models.size() * config.retrain_set.size()) + " base scenarios");
  ResultStore store = run_grid(panel, config.models, grid);

  // Leaderboard from the baseline scenario of every successful base model.
  Leaderboard board;
  std::map<std::string, std::string> types;
  for (const auto& spec : config.models) {
    types[spec.name] = "base";
    const auto* r = store.find(spec.name, config.baseline);
    if (!r || r->failed) continue;
    try {
      const auto m = evaluate_scenario(*r, panel, config.scenario.s_point, config.scenario.s_prob);
      board.push_back({spec.name, m.rmsse.value, m.smql.value, m.ct()});
    } catch (const Error& e) {
      summary["warnings"].push_back("leaderboard: " + spec.name + ": " + e.what());
    }
  }
  std::vector<EnsembleSpec> ensembles;
  for (const auto& e : config.pinned_pools) {
    const bool ready = std::all_of(e.members.begin(), e.members.end(), [&](const std::string& m) {
      return std::any_of(board.begin(), board.end(), [&](const LeaderboardRow& row) { return row.model == m; });
    });
    if (!ready) {
      summary["warnings"].push_back("ensemble " + e.name + " skipped: a member has no successful baseline scenario");
      continue;
    }
    ensembles.push_back(e);
    types[e.name] = e.criterion == PoolCriterion::accuracy ? "ENSACC" : "ENSTIME";
  }
  for (auto criterion : config.pinned_pools.empty() ? config.ensemble_criteria : std::vector<PoolCriterion>{})
    for (std::size_t k : config.ensemble_sizes) {
      if (board.size() < k) {
        summary["warnings"].push_back("ensemble " + ensemble_name(criterion, k) + " skipped: only " +
                                      std::to_string(board.size()) + " base models on the leaderboard");
        continue;
      }
      ensembles.push_back(select_pool(board, criterion, k));
      types[ensembles.back().name] = criterion == PoolCriterion::accuracy ? "ENSACC" : "ENSTIME";
    }
  add_ensembles(store, ensembles, config.retrain_set);
  say("combined " + std::to_string(ensembles.size()) + " ensembles");

  summary["failures"] = nlohmann::ordered_json::array();
  summary["scenario_warnings"] = nlohmann::ordered_json::array();
  for (const auto& r : store.results()) {
    if (r.failed) {
      nlohmann::ordered_json f{{"method", r.method}, {"retrain", r.retrain}, {"error", r.error}};
      if (r.failed_origin) f["origin"] = *r.failed_origin;
      summary["failures"].push_back(f);
    }
    for (const auto& w : r.warnings)
      summary["scenario_warnings"].push_back(r.method + " r=" + std::to_string(r.retrain) + ": " + w);
  }
  summary["scenarios"] = {{"total", store.size()}, {"succeeded", store.succeeded()}};
  if (store.succeeded() == 0) {
    summary["status"] = "failed";
    outcome.exit_code = 1;
    fs::create_directories(config.output_dir);
    std::ofstream(config.output_dir / "run_summary.json") << summary.dump(2) << '\n';
    return outcome;
  }

  const fs::path out = config.output_dir;
  fs::create_directories(out);
  write_store(store, panel, out / "forecasts");
  outcome.report = build_report(store, panel, config, types, ensembles, board);
  write_report(outcome.report, out, config.alpha);
  for (const auto& n : outcome.report.notes) summary["notes"].push_back(n);
  if (!store.succeeded() || summary["failures"].size() > 0) summary["status"] = "partial";
  RunConfig effective = config;
  effective.pinned_pools = ensembles;
  std::ofstream(out / "effective_config.json") << to_json(effective).dump(2) << '\n';
  std::ofstream(out / "run_summary.json") << summary.dump(2) << '\n';
  say("wrote report to " + out.string());
  return outcome;
}

}  // namespace retrainbench
