#pragma once

// Run configuration: one JSON document holding every scientific setting of a run. Parsing resolves
// frequency-dependent defaults; the resolved document is written next to the outputs.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrainbench/backtest.hpp"
#include "retrainbench/conformal.hpp"
#include "retrainbench/cost.hpp"
#include "retrainbench/ensemble.hpp"
#include "retrainbench/features.hpp"
#include "retrainbench/models.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::filesystem::path data_path;
  std::optional<std::filesystem::path> statics_path;
  std::optional<std::filesystem::path> exogenous_path;
  PanelSchema schema;
  int frequency = 7;
  std::size_t min_obs = 730;
  bool history_filter = true;  // also drop series too short for the first origin's calibration
  ScenarioConfig scenario;
  std::vector<std::size_t> retrain_set;
  std::size_t baseline = 7;
  FeatureConfig features;
  std::vector<ModelSpec> models;
  std::vector<PoolCriterion> ensemble_criteria;
  std::vector<std::size_t> ensemble_sizes;
  std::vector<EnsembleSpec> pinned_pools;  // replaces leaderboard selection when non-empty
  QuantileLevels levels = QuantileLevels::standard();
  std::size_t conformal_multiple = 4;
  double cost_rate = 3.5;
  double cost_target_series = 0.0;  // 0 = same as the evaluated panel
  double alpha = 0.05;
  bool cell_blocking = false;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";
};

namespace detail {

using json = nlohmann::ordered_json;

template <class T>
T get_field(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError(path.empty() ? key : path + "." + key, "has the wrong type");
  }
}

inline std::size_t get_count(const json& j, const std::string& path, const char* key, std::size_t fallback,
                             std::size_t minimum = 1) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum))
    throw ConfigError(field, "must be an integer >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v.get<long long>());
}

inline std::vector<int> get_int_list(const json& j, const std::string& field, const char* key,
                                     std::vector<int> fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(field, "must be a list of positive integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) throw ConfigError(field, "must contain positive integers");
    out.push_back(static_cast<int>(e.get<long long>()));
  }
  return out;
}

inline const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key) || root.at(key).is_null()) return empty;
  if (!root.at(key).is_object()) throw ConfigError(key, "must be an object");
  return root.at(key);
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::ordered_json& root, const std::filesystem::path& base_dir = {}) {
  using detail::json;
  if (!root.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  const json& data = detail::section(root, "data");
  if (!data.contains("path") || !data.at("path").is_string()) throw ConfigError("data.path", "is required");
  c.data_path = resolve(data.at("path").get<std::string>());
  if (data.contains("statics") && data.at("statics").is_string()) c.statics_path = resolve(data.at("statics"));
  if (data.contains("exogenous") && data.at("exogenous").is_string()) c.exogenous_path = resolve(data.at("exogenous"));
  if (data.contains("schema")) {
    const json& s = data.at("schema");
    if (!s.is_object()) throw ConfigError("data.schema", "must be an object");
    c.schema.id_column = detail::get_field<std::string>(s, "data.schema", "id", c.schema.id_column);
    c.schema.time_column = detail::get_field<std::string>(s, "data.schema", "time", c.schema.time_column);
    c.schema.value_column = detail::get_field<std::string>(s, "data.schema", "value", c.schema.value_column);
    c.schema.exogenous = detail::get_field<std::vector<std::string>>(s, "data.schema", "exogenous", {});
  }

  c.frequency = static_cast<int>(detail::get_count(root, "", "frequency", 7));
  const bool weekly = c.frequency >= 52;

  const json& filter = detail::section(root, "filter");
  c.min_obs = detail::get_count(filter, "filter", "min_obs", default_min_obs(c.frequency), 0);
  c.history_filter = detail::get_field<bool>(filter, "filter", "history", true);

  const json& sc = detail::section(root, "scenario");
  c.scenario.frequency = c.frequency;
  c.scenario.horizon = detail::get_count(sc, "scenario", "horizon", weekly ? 13 : 28);
  c.scenario.test_length = detail::get_count(sc, "scenario", "test_length", weekly ? 52 : 364);
  c.scenario.step = detail::get_count(sc, "scenario", "step", 1);
  if (c.scenario.step != 1) throw ConfigError("scenario.step", "only step size 1 is supported");
  c.scenario.s_point = detail::get_count(sc, "scenario", "s_point", 1);
  c.scenario.s_prob = detail::get_count(sc, "scenario", "s_prob", weekly ? 1 : 7);
  if (c.scenario.horizon > c.scenario.test_length)
    throw ConfigError("scenario.horizon", "must not exceed scenario.test_length");
  {
    std::vector<long long> fallback = weekly ? std::vector<long long>{1, 2, 3, 4, 6, 8, 10, 13, 26, 52}
                                             : std::vector<long long>{7, 14, 21, 30, 60, 90, 120, 150, 180, 364};
    std::vector<long long> raw = fallback;
    if (sc.contains("retrain_set")) {
      const auto& v = sc.at("retrain_set");
      if (!v.is_array() || v.empty()) throw ConfigError("scenario.retrain_set", "must be a non-empty list");
      raw.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError("scenario.retrain_set", "entries must be integers");
        raw.push_back(e.get<long long>());
      }
    }
    for (long long r : raw) {
      if (r < 1 || static_cast<std::size_t>(r) > c.scenario.test_length)
        throw ConfigError("scenario.retrain_set", "entry " + std::to_string(r) + " outside [1, test_length=" +
                                                      std::to_string(c.scenario.test_length) + "]");
      if (std::find(c.retrain_set.begin(), c.retrain_set.end(), static_cast<std::size_t>(r)) != c.retrain_set.end())
        throw ConfigError("scenario.retrain_set", "duplicate entry " + std::to_string(r));
      c.retrain_set.push_back(static_cast<std::size_t>(r));
    }
    std::sort(c.retrain_set.begin(), c.retrain_set.end());
  }
  c.baseline = detail::get_count(sc, "scenario", "baseline", weekly ? 1 : 7);
  if (std::find(c.retrain_set.begin(), c.retrain_set.end(), c.baseline) == c.retrain_set.end())
    throw ConfigError("scenario.baseline", "baseline r=" + std::to_string(c.baseline) + " is not in the retrain set");

  const json& feat = detail::section(root, "features");
  c.features = default_feature_config(c.frequency);
  c.features.lags = detail::get_int_list(feat, "features.lags", "lags", c.features.lags);
  c.features.rolling_windows =
      detail::get_int_list(feat, "features.rolling_windows", "rolling_windows", c.features.rolling_windows);
  c.features.expanding_mean = detail::get_field<bool>(feat, "features", "expanding_mean", c.features.expanding_mean);
  if (feat.contains("calendar")) {
    const auto& cal = feat.at("calendar");
    if (!cal.is_array()) throw ConfigError("features.calendar", "must be a list");
    c.features.calendar = {};
    for (const auto& e : cal) {
      const std::string name = e.is_string() ? e.get<std::string>() : "";
      if (name == "year") c.features.calendar.year = true;
      else if (name == "month") c.features.calendar.month = true;
      else if (name == "week") c.features.calendar.week = true;
      else if (name == "day_of_week") c.features.calendar.day_of_week = true;
      else throw ConfigError("features.calendar", "unknown calendar field '" + name + "'");
    }
  }
  {
    const auto enc = detail::get_field<std::string>(feat, "features", "static_encoding", "ordinal");
    if (enc == "ordinal") c.features.static_encoding = StaticEncoding::ordinal;
    else if (enc == "one_hot") c.features.static_encoding = StaticEncoding::one_hot;
    else throw ConfigError("features.static_encoding", "must be 'ordinal' or 'one_hot'");
  }
  c.features.exogenous = detail::get_field<std::vector<std::string>>(feat, "features", "exogenous", {});

  if (!root.contains("models") || !root.at("models").is_array() || root.at("models").empty())
    throw ConfigError("models", "must be a non-empty list");
  for (std::size_t k = 0; k < root.at("models").size(); ++k) {
    const json& m = root.at("models")[k];
    const std::string field = "models[" + std::to_string(k) + "]";
    if (!m.is_object()) throw ConfigError(field, "must be an object");
    ModelSpec spec;
    try {
      spec.kind = parse_model_kind(detail::get_field<std::string>(m, field, "kind", ""));
    } catch (const Error& e) {
      throw ConfigError(field + ".kind", e.what());
    }
    spec.name = detail::get_field<std::string>(m, field, "name", std::string(to_string(spec.kind)));
    if (m.contains("hyperparameters")) {
      const auto& hp = m.at("hyperparameters");
      if (!hp.is_object()) throw ConfigError(field + ".hyperparameters", "must be an object");
      for (const auto& [key, value] : hp.items()) {
        if (!value.is_number()) throw ConfigError(field + ".hyperparameters." + key, "must be a number");
        spec.hyperparameters[key] = value.get<double>();
      }
    }
    if (spec.kind == ModelKind::seasonal_naive && !spec.hyperparameters.count("period"))
      spec.hyperparameters["period"] = c.frequency;
    try {
      spec.validate();
    } catch (const Error& e) {
      throw ConfigError(field + ".hyperparameters", e.what());
    }
    for (const auto& other : c.models)
      if (other.name == spec.name) throw ConfigError(field + ".name", "duplicate model name '" + spec.name + "'");
    c.models.push_back(std::move(spec));
  }

  const json& ens = detail::section(root, "ensembles");
  for (const auto& name : detail::get_field<std::vector<std::string>>(ens, "ensembles", "criteria", {"accuracy", "time"})) {
    try {
      c.ensemble_criteria.push_back(parse_criterion(name));
    } catch (const Error& e) {
      throw ConfigError("ensembles.criteria", e.what());
    }
  }
  for (int k : detail::get_int_list(ens, "ensembles.sizes", "sizes", {2, 3, 4, 5})) {
    if (k < 2 || k > 5) throw ConfigError("ensembles.sizes", "sizes must lie in 2..5");
    c.ensemble_sizes.push_back(static_cast<std::size_t>(k));
  }
  if (ens.contains("pools")) {
    const auto& pools = ens.at("pools");
    if (!pools.is_array()) throw ConfigError("ensembles.pools", "must be a list");
    for (std::size_t k = 0; k < pools.size(); ++k) {
      const std::string field = "ensembles.pools[" + std::to_string(k) + "]";
      const json& p = pools[k];
      if (!p.is_object()) throw ConfigError(field, "must be an object");
      EnsembleSpec e;
      try {
        e.criterion = parse_criterion(detail::get_field<std::string>(p, field, "criterion", "accuracy"));
      } catch (const Error& err) {
        throw ConfigError(field + ".criterion", err.what());
      }
      e.members = detail::get_field<std::vector<std::string>>(p, field, "members", {});
      e.name = detail::get_field<std::string>(p, field, "name", ensemble_name(e.criterion, e.members.size()));
      try {
        e.validate();
      } catch (const Error& err) {
        throw ConfigError(field + ".members", err.what());
      }
      for (const auto& m : e.members)
        if (std::none_of(c.models.begin(), c.models.end(), [&](const ModelSpec& s) { return s.name == m; }))
          throw ConfigError(field + ".members", "unknown model '" + m + "'");
      for (const auto& other : c.pinned_pools)
        if (other.name == e.name) throw ConfigError(field + ".name", "duplicate ensemble name '" + e.name + "'");
      for (const auto& m : c.models)
        if (m.name == e.name) throw ConfigError(field + ".name", "'" + e.name + "' is also a model name");
      c.pinned_pools.push_back(std::move(e));
    }
  }

  if (root.contains("quantiles")) {
    try {
      c.levels = QuantileLevels(root.at("quantiles").get<std::vector<double>>());
    } catch (const std::exception& e) {
      throw ConfigError("quantiles", e.what());
    }
    if (!c.levels.symmetric()) throw ConfigError("quantiles", "levels must be symmetric about 0.5");
  }
  const json& conf = detail::section(root, "conformal");
  c.conformal_multiple = detail::get_count(conf, "conformal", "multiple", weekly ? 2 : 4, 2);

  const json& cost = detail::section(root, "cost");
  c.cost_rate = detail::get_field<double>(cost, "cost", "rate_per_hour", 3.5);
  if (!(c.cost_rate > 0)) throw ConfigError("cost.rate_per_hour", "must be > 0");
  c.cost_target_series = detail::get_field<double>(cost, "cost", "target_series", 0.0);
  if (c.cost_target_series < 0) throw ConfigError("cost.target_series", "must be >= 0");

  const json& st = detail::section(root, "stats");
  c.alpha = detail::get_field<double>(st, "stats", "alpha", 0.05);
  if (std::abs(c.alpha - 0.05) > 1e-9 && std::abs(c.alpha - 0.10) > 1e-9)
    throw ConfigError("stats.alpha", "supported values are 0.05 and 0.10");
  const auto blocking = detail::get_field<std::string>(st, "stats", "blocking", "series");
  if (blocking != "series" && blocking != "cell") throw ConfigError("stats.blocking", "must be 'series' or 'cell'");
  c.cell_blocking = blocking == "cell";

  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned() && !root.at("seed").is_number_integer())
      throw ConfigError("seed", "must be a nonnegative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }
  c.workers = detail::get_count(root, "", "workers", 1);
  c.output_dir = detail::get_field<std::string>(root, "", "output_dir", "out");  // relative to the working directory
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(root, path.parent_path());
}

// Fully resolved configuration; parsing it again yields the same RunConfig.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["data"]["path"] = std::filesystem::absolute(c.data_path).string();
  if (c.statics_path) j["data"]["statics"] = std::filesystem::absolute(*c.statics_path).string();
  if (c.exogenous_path) j["data"]["exogenous"] = std::filesystem::absolute(*c.exogenous_path).string();
  j["data"]["schema"] = {{"id", c.schema.id_column},
                         {"time", c.schema.time_column},
                         {"value", c.schema.value_column},
                         {"exogenous", c.schema.exogenous}};
  j["frequency"] = c.frequency;
  j["filter"] = {{"min_obs", c.min_obs}, {"history", c.history_filter}};
  j["scenario"] = {{"horizon", c.scenario.horizon},   {"test_length", c.scenario.test_length},
                   {"step", c.scenario.step},         {"retrain_set", c.retrain_set},
                   {"baseline", c.baseline},          {"s_point", c.scenario.s_point},
                   {"s_prob", c.scenario.s_prob}};
  std::vector<std::string> calendar;
  if (c.features.calendar.year) calendar.push_back("year");
  if (c.features.calendar.month) calendar.push_back("month");
  if (c.features.calendar.week) calendar.push_back("week");
  if (c.features.calendar.day_of_week) calendar.push_back("day_of_week");
  j["features"] = {{"lags", c.features.lags},
                   {"rolling_windows", c.features.rolling_windows},
                   {"expanding_mean", c.features.expanding_mean},
                   {"calendar", calendar},
                   {"static_encoding", c.features.static_encoding == StaticEncoding::ordinal ? "ordinal" : "one_hot"},
                   {"exogenous", c.features.exogenous}};
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : c.models) {
    nlohmann::ordered_json hp = nlohmann::ordered_json::object();
    for (const auto& [key, fallback] : default_hyperparameters(m.kind)) hp[key] = m.param(key);
    j["models"].push_back({{"name", m.name}, {"kind", std::string(to_string(m.kind))}, {"hyperparameters", hp}});
  }
  std::vector<std::string> criteria;
  for (auto cr : c.ensemble_criteria) criteria.emplace_back(to_string(cr));
  j["ensembles"] = {{"criteria", criteria}, {"sizes", c.ensemble_sizes}};
  if (!c.pinned_pools.empty()) {
    auto& pools = j["ensembles"]["pools"] = nlohmann::ordered_json::array();
    for (const auto& e : c.pinned_pools)
      pools.push_back({{"name", e.name}, {"criterion", std::string(to_string(e.criterion))}, {"members", e.members}});
  }
  j["quantiles"] = c.levels.values();
  j["conformal"] = {{"multiple", c.conformal_multiple}};
  j["cost"] = {{"rate_per_hour", c.cost_rate}, {"target_series", c.cost_target_series}};
  j["stats"] = {{"alpha", c.alpha}, {"blocking", c.cell_blocking ? "cell" : "series"}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output_dir"] = std::filesystem::absolute(c.output_dir).string();
  return j;
}

}  // namespace retrainbench
