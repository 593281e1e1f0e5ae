#include <gtest/gtest.h>

#include "retrainbench/ensemble.hpp"
#include "retrainbench/random.hpp"

using namespace retrainbench;

namespace {

// M5 leaderboard at the baseline retrain frequency.
Leaderboard m5_board() {
  return {{"LR", 0.760, 0.269, 11373},      {"XGBoost", 0.739, 0.246, 15417}, {"LGBM", 0.755, 0.247, 44429},
          {"CatBoost", 0.926, 0.280, 10424}, {"MLP", 0.804, 0.264, 17584},     {"TCN", 0.847, 0.271, 33364},
          {"NBEATSx", 0.799, 0.263, 21226},  {"NHITS", 0.812, 0.267, 21969}};
}

PointForecast pf(std::vector<double> v, std::size_t series, std::size_t horizon) {
  PointForecast p;
  p.series = series;
  p.horizon = horizon;
  p.values = std::move(v);
  return p;
}

QuantileForecast qf(std::vector<double> levels, std::vector<double> point, std::vector<double> values,
                    std::size_t series, std::size_t horizon) {
  QuantileForecast q;
  q.series = series;
  q.horizon = horizon;
  q.levels = QuantileLevels(std::move(levels));
  q.point = std::move(point);
  q.values = std::move(values);
  return q;
}

}  // namespace

TEST(Ensemble, MeanOfTwoMembers) {
  const auto a = pf({1, 10}, 1, 2), b = pf({3, 20}, 1, 2);
  const PointForecast* m[] = {&a, &b};
  EXPECT_EQ(combine_points(m).values, (std::vector<double>{2, 15}));
}

TEST(Ensemble, IdempotentAndSymmetric) {
  Rng rng(1);
  std::vector<double> va(12), vb(12), vc(12);
  for (auto* v : {&va, &vb, &vc})
    for (double& x : *v) x = rng.uniform(0, 10);
  const auto a = pf(va, 3, 4), b = pf(vb, 3, 4), c = pf(vc, 3, 4);
  const PointForecast* same[] = {&a, &a, &a};
  const auto id = combine_points(same).values;
  for (std::size_t k = 0; k < va.size(); ++k) EXPECT_NEAR(id[k], va[k], 1e-12);
  const PointForecast* abc[] = {&a, &b, &c};
  const PointForecast* cab[] = {&c, &a, &b};
  const auto x = combine_points(abc).values, y = combine_points(cab).values;
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(x[k], y[k], 1e-12);
}

TEST(Ensemble, CombinationIsLinear) {
  Rng rng(2);
  std::vector<double> va(8), vb(8);
  for (double& x : va) x = rng.normal();
  for (double& x : vb) x = rng.normal();
  const double c = -3.5;
  std::vector<double> sa = va, sb = vb;
  for (double& x : sa) x *= c;
  for (double& x : sb) x *= c;
  const auto a = pf(va, 2, 4), b = pf(vb, 2, 4), ca = pf(sa, 2, 4), cb = pf(sb, 2, 4);
  const PointForecast* plain[] = {&a, &b};
  const PointForecast* scaled[] = {&ca, &cb};
  const auto p = combine_points(plain).values, s = combine_points(scaled).values;
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(s[k], c * p[k], 1e-12);
}

TEST(Ensemble, MisalignedMembersRejected) {
  const auto a = pf({1, 2}, 1, 2), b = pf({1, 2, 3}, 1, 3);
  const PointForecast* m[] = {&a, &b};
  EXPECT_THROW(combine_points(m), Error);
}

TEST(Ensemble, QuantileAveraging) {
  const auto a = qf({0.1, 0.5, 0.9}, {10}, {8, 10, 12}, 1, 1);
  const auto b = qf({0.1, 0.5, 0.9}, {10}, {6, 10, 14}, 1, 1);
  const QuantileForecast* m[] = {&a, &b};
  const auto out = combine_quantiles(m);
  EXPECT_EQ(out.forecast.values, (std::vector<double>{7, 10, 13}));
  EXPECT_EQ(out.repaired_cells, 0u);
  const QuantileForecast* same[] = {&a, &a};
  EXPECT_EQ(combine_quantiles(same).forecast.values, a.values);
}

TEST(Ensemble, MonotoneMembersNeedNoRepair) {
  Rng rng(4);
  std::vector<QuantileForecast> members;
  for (int m = 0; m < 4; ++m) {
    std::vector<double> point(6), values;
    for (std::size_t c = 0; c < 6; ++c) {
      point[c] = rng.uniform(0, 100);
      std::vector<double> cell(5);
      for (double& v : cell) v = point[c] + rng.normal() * 10;
      std::sort(cell.begin(), cell.end());
      values.insert(values.end(), cell.begin(), cell.end());
    }
    members.push_back(qf({0.05, 0.25, 0.5, 0.75, 0.95}, point, values, 2, 3));
  }
  std::vector<const QuantileForecast*> ptrs;
  for (const auto& m : members) ptrs.push_back(&m);
  EXPECT_EQ(combine_quantiles(ptrs).repaired_cells, 0u);
}

TEST(Ensemble, CrossingIsRepairedAndCounted) {
  const auto a = qf({0.1, 0.9}, {0}, {5, 1}, 1, 1);
  const auto b = qf({0.1, 0.9}, {0}, {5, 1}, 1, 1);
  const QuantileForecast* m[] = {&a, &b};
  const auto out = combine_quantiles(m);
  EXPECT_EQ(out.repaired_cells, 1u);
  EXPECT_EQ(out.forecast.values, (std::vector<double>{1, 5}));
}

TEST(Ensemble, DifferingLevelSetsRejected) {
  const auto a = qf({0.1, 0.9}, {0}, {1, 2}, 1, 1);
  const auto b = qf({0.2, 0.8}, {0}, {1, 2}, 1, 1);
  const QuantileForecast* m[] = {&a, &b};
  EXPECT_THROW(combine_quantiles(m), Error);
}

TEST(Ensemble, AccuracyPoolsOnM5Board) {
  const auto board = m5_board();
  const std::vector<std::string> order{"XGBoost", "LGBM", "LR", "NBEATSx", "MLP"};
  for (std::size_t k = 2; k <= 5; ++k) {
    const auto pool = select_pool(board, PoolCriterion::accuracy, k);
    EXPECT_EQ(pool.name, "Ens" + std::to_string(k) + "A");
    EXPECT_EQ(pool.members, std::vector<std::string>(order.begin(), order.begin() + static_cast<long>(k)));
  }
}

TEST(Ensemble, TimePoolsOnM5Board) {
  const auto board = m5_board();
  const std::vector<std::string> order{"CatBoost", "LR", "XGBoost", "MLP", "NBEATSx"};
  for (std::size_t k = 2; k <= 5; ++k) {
    const auto pool = select_pool(board, PoolCriterion::time, k);
    EXPECT_EQ(pool.name, "Ens" + std::to_string(k) + "T");
    EXPECT_EQ(pool.members, std::vector<std::string>(order.begin(), order.begin() + static_cast<long>(k)));
  }
}

TEST(Ensemble, PoolsAreNested) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    Leaderboard board;
    for (int m = 0; m < 7; ++m)
      board.push_back({"m" + std::to_string(m), std::round(rng.uniform(0.5, 1.0) * 20) / 20, 0.2,
                       std::round(rng.uniform(0, 10))});
    for (auto c : {PoolCriterion::accuracy, PoolCriterion::time})
      for (std::size_t k = 2; k < 5; ++k) {
        const auto small = select_pool(board, c, k).members, big = select_pool(board, c, k + 1).members;
        for (const auto& name : small) EXPECT_NE(std::find(big.begin(), big.end(), name), big.end());
      }
  }
}

TEST(Ensemble, TiesBrokenByOtherMetricThenName) {
  const Leaderboard flat{{"c", 1, 1, 1}, {"a", 1, 1, 1}, {"b", 1, 1, 1}};
  EXPECT_EQ(select_pool(flat, PoolCriterion::accuracy, 2).members, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(select_pool(flat, PoolCriterion::time, 2).members, (std::vector<std::string>{"a", "b"}));
  const Leaderboard tie{{"a", 0.7, 0.2, 50}, {"b", 0.7, 0.2, 10}, {"c", 0.9, 0.2, 1}};
  EXPECT_EQ(select_pool(tie, PoolCriterion::accuracy, 2).members, (std::vector<std::string>{"b", "a"}));
}

TEST(Ensemble, TooFewModelsRejected) {
  const Leaderboard board{{"a", 1, 1, 1}, {"b", 1, 1, 1}};
  EXPECT_THROW(select_pool(board, PoolCriterion::accuracy, 3), Error);
}

TEST(Ensemble, SpecValidation) {
  EnsembleSpec dup{"E", {"a", "a"}, PoolCriterion::accuracy};
  EXPECT_THROW(dup.validate(), Error);
  EnsembleSpec one{"E", {"a"}, PoolCriterion::accuracy};
  EXPECT_THROW(one.validate(), Error);
}

TEST(Ensemble, CtIsAdditive) {
  const double two[] = {15417, 44429};
  EXPECT_EQ(combined_ct(two), 59846.0);
  const double three[] = {15417, 44429, 11373};
  EXPECT_EQ(combined_ct(three), 71219.0);
}
