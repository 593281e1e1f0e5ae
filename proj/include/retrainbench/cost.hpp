#pragma once

#include <string>

#include "retrainbench/core.hpp"

namespace retrainbench {

struct CostModel {
  double rate_per_hour = 3.5;
  double dataset_series = 1.0;  // series actually run
  double target_series = 1.0;   // projected deployment size, e.g. SKUs x stores

  void validate() const {
    if (!(rate_per_hour > 0.0)) throw Error("cost: rate must be > 0");
    if (!(dataset_series > 0.0) || !(target_series > 0.0)) throw Error("cost: series counts must be > 0");
  }
};

// Compute hours at the given rate, scaled from the evaluated panel to the target deployment.
inline double estimate_cost(double ct_seconds, const CostModel& model) {
  model.validate();
  if (ct_seconds < 0.0) throw Error("cost: computing time must be >= 0");
  return ct_seconds / 3600.0 * model.rate_per_hour * (model.target_series / model.dataset_series);
}

}  // namespace retrainbench
