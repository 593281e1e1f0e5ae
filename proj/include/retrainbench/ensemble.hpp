#pragma once

// Simple-mean forecast combination and accuracy/time driven pool selection.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "retrainbench/conformal.hpp"
#include "retrainbench/core.hpp"
#include "retrainbench/models.hpp"

namespace retrainbench {

enum class PoolCriterion { accuracy, time };

inline std::string_view to_string(PoolCriterion c) { return c == PoolCriterion::accuracy ? "accuracy" : "time"; }

inline PoolCriterion parse_criterion(std::string_view text) {
  if (text == "accuracy") return PoolCriterion::accuracy;
  if (text == "time") return PoolCriterion::time;
  throw Error("unknown ensemble criterion '" + std::string(text) + "' (expected accuracy or time)");
}

struct EnsembleSpec {
  std::string name;
  std::vector<std::string> members;
  PoolCriterion criterion = PoolCriterion::accuracy;

  std::size_t size() const { return members.size(); }

  void validate() const {
    if (members.size() < 2) throw Error("ensemble '" + name + "': needs at least 2 members");
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (members[i] == members[j]) throw Error("ensemble '" + name + "': duplicate member '" + members[i] + "'");
  }
};

// Ens2A, Ens3T, ...
inline std::string ensemble_name(PoolCriterion c, std::size_t k) {
  return "Ens" + std::to_string(k) + (c == PoolCriterion::accuracy ? "A" : "T");
}

struct LeaderboardRow {
  std::string model;
  double rmsse = 0.0;
  double smql = 0.0;
  double ct = 0.0;
};

using Leaderboard = std::vector<LeaderboardRow>;

// k smallest RMSSE (accuracy) or CT (time); ties by the other metric, then by name.
inline EnsembleSpec select_pool(const Leaderboard& board, PoolCriterion criterion, std::size_t k) {
  if (k < 2) throw Error("select_pool: pool size must be >= 2");
  if (board.size() < k)
    throw Error("select_pool: leaderboard has " + std::to_string(board.size()) + " models, need " + std::to_string(k));
  for (const auto& row : board)
    if (!std::isfinite(row.rmsse) || !std::isfinite(row.ct))
      throw Error("select_pool: non-finite leaderboard metrics for '" + row.model + "'");
  std::vector<const LeaderboardRow*> rows;
  for (const auto& r : board) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [criterion](const LeaderboardRow* a, const LeaderboardRow* b) {
    if (criterion == PoolCriterion::accuracy) return std::tie(a->rmsse, a->ct, a->model) < std::tie(b->rmsse, b->ct, b->model);
    return std::tie(a->ct, a->rmsse, a->model) < std::tie(b->ct, b->rmsse, b->model);
  });
  EnsembleSpec spec;
  spec.name = ensemble_name(criterion, k);
  spec.criterion = criterion;
  for (std::size_t i = 0; i < k; ++i) spec.members.push_back(rows[i]->model);
  return spec;
}

inline PointForecast combine_points(std::span<const PointForecast* const> members) {
  if (members.empty()) throw Error("combine_points: no members");
  const auto& first = *members.front();
  for (std::size_t m = 1; m < members.size(); ++m)
    if (members[m]->series != first.series || members[m]->horizon != first.horizon)
      throw Error("combine_points: member " + std::to_string(m) + " covers " + std::to_string(members[m]->series) +
                  " series x " + std::to_string(members[m]->horizon) + " steps, member 0 covers " +
                  std::to_string(first.series) + " x " + std::to_string(first.horizon));
  PointForecast out;
  out.series = first.series;
  out.horizon = first.horizon;
  out.values.assign(first.values.size(), 0.0);
  for (const auto* m : members)
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += m->values[i];
  for (double& v : out.values) v /= static_cast<double>(members.size());
  return out;
}

struct CombinedQuantiles {
  QuantileForecast forecast;
  std::size_t repaired_cells = 0;  // cells re-sorted after a numerical crossing
};

inline CombinedQuantiles combine_quantiles(std::span<const QuantileForecast* const> members) {
  if (members.empty()) throw Error("combine_quantiles: no members");
  const auto& first = *members.front();
  for (std::size_t m = 1; m < members.size(); ++m) {
    if (!(members[m]->levels == first.levels))
      throw Error("combine_quantiles: member " + std::to_string(m) + " has a different level set");
    if (members[m]->series != first.series || members[m]->horizon != first.horizon)
      throw Error("combine_quantiles: member " + std::to_string(m) + " index set differs from member 0");
  }
  CombinedQuantiles out;
  auto& fc = out.forecast;
  fc.series = first.series;
  fc.horizon = first.horizon;
  fc.levels = first.levels;
  fc.point.assign(first.point.size(), 0.0);
  fc.values.assign(first.values.size(), 0.0);
  for (const auto* m : members) {
    for (std::size_t i = 0; i < fc.point.size(); ++i) fc.point[i] += m->point[i];
    for (std::size_t i = 0; i < fc.values.size(); ++i) fc.values[i] += m->values[i];
  }
  const double k = static_cast<double>(members.size());
  for (double& v : fc.point) v /= k;
  for (double& v : fc.values) v /= k;
  const std::size_t L = fc.levels.size();
  for (std::size_t c = 0; c < fc.point.size(); ++c) {
    auto first_it = fc.values.begin() + static_cast<std::ptrdiff_t>(c * L);
    if (!std::is_sorted(first_it, first_it + static_cast<std::ptrdiff_t>(L))) {
      std::sort(first_it, first_it + static_cast<std::ptrdiff_t>(L));
      ++out.repaired_cells;
    }
  }
  return out;
}

// Combination is charged zero seconds, so an ensemble costs the sum of its members.
inline double combined_ct(std::span<const double> member_ct) {
  double total = 0.0;
  for (double v : member_ct) total += v;
  return total;
}

}  // namespace retrainbench
