#include <gtest/gtest.h>

#include "retrainbench/cost.hpp"

using namespace retrainbench;

TEST(Cost, OneHourAtDefaultRate) {
  EXPECT_DOUBLE_EQ(estimate_cost(3600, CostModel{}), 3.5);
}

TEST(Cost, M5AndVn1Projections) {
  const double m5 = estimate_cost(11373, CostModel{3.5, 28298, 1e9});
  EXPECT_NEAR(m5, 390732, 390732 * 0.001);
  const double small = estimate_cost(236, CostModel{3.5, 15053, 1e9});
  EXPECT_NEAR(small, 15234, 15234 * 0.005);
}

TEST(Cost, ZeroTimeIsFree) { EXPECT_EQ(estimate_cost(0, CostModel{3.5, 10, 1000}), 0.0); }

TEST(Cost, LinearInTimeAndTarget) {
  const CostModel m{2.0, 50, 5000};
  EXPECT_NEAR(estimate_cost(300, m) + estimate_cost(700, m), estimate_cost(1000, m), 1e-9);
  EXPECT_NEAR(estimate_cost(1000, CostModel{2.0, 50, 10000}), 2 * estimate_cost(1000, m), 1e-9);
  EXPECT_NEAR(estimate_cost(1000, CostModel{4.0, 50, 5000}), 2 * estimate_cost(1000, m), 1e-9);
}

TEST(Cost, Validation) {
  EXPECT_THROW(estimate_cost(-1, CostModel{}), Error);
  EXPECT_THROW(estimate_cost(1, CostModel{0, 1, 1}), Error);
  EXPECT_THROW(estimate_cost(1, CostModel{1, 0, 1}), Error);
}
