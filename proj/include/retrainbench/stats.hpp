#pragma once

// Friedman rank test (chi-square form, tie corrected) and Nemenyi critical differences.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/core.hpp"

namespace retrainbench {

// Ascending ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Blocks (rows) x treatments (columns), row-major. Lower values are better.
struct RankMatrix {
  std::size_t blocks = 0;
  std::size_t treatments = 0;
  std::vector<double> values;

  RankMatrix() = default;
  RankMatrix(std::size_t n_blocks, std::size_t n_treatments, std::vector<double> v)
      : blocks(n_blocks), treatments(n_treatments), values(std::move(v)) {
    validate();
  }

  void validate() const {
    if (treatments < 2) throw Error("rank matrix: need at least 2 treatments");
    if (blocks < 2) throw Error("rank matrix: need at least 2 blocks");
    if (values.size() != blocks * treatments) throw Error("rank matrix: missing cells");
    for (double v : values)
      if (std::isnan(v)) throw Error("rank matrix: missing (NaN) cell");
  }

  std::span<const double> block(std::size_t b) const {
    return std::span<const double>(values).subspan(b * treatments, treatments);
  }
};

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;
  std::size_t blocks = 0;
  std::size_t treatments = 0;
};

inline FriedmanResult friedman(const RankMatrix& m) {
  m.validate();
  const double N = static_cast<double>(m.blocks);
  const double k = static_cast<double>(m.treatments);
  FriedmanResult out;
  out.blocks = m.blocks;
  out.treatments = m.treatments;
  out.mean_ranks.assign(m.treatments, 0.0);
  double tie_sum = 0.0;
  for (std::size_t b = 0; b < m.blocks; ++b) {
    const auto row = m.block(b);
    const auto ranks = average_ranks(row);
    for (std::size_t j = 0; j < m.treatments; ++j) out.mean_ranks[j] += ranks[j];
    std::vector<double> sorted(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
  }
  for (double& r : out.mean_ranks) r /= N;

  const double correction = 1.0 - tie_sum / (N * k * (k * k - 1.0));
  if (correction <= 1e-12) return out;  // every block fully tied
  double sq = 0.0;
  for (double r : out.mean_ranks) sq += r * r;
  const double raw = 12.0 * N / (k * (k + 1.0)) * (sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  out.statistic = std::max(0.0, raw / correction);
  out.p_value = out.statistic > 0.0 ? boost::math::gamma_q((k - 1.0) / 2.0, out.statistic / 2.0) : 1.0;
  return out;
}

namespace detail {
// Studentized range quantiles / sqrt(2) for k = 2..20 treatments.
inline constexpr std::array<double, 19> nemenyi_q05{1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                                    3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                                    3.426, 3.458, 3.489, 3.517, 3.544};
inline constexpr std::array<double, 19> nemenyi_q10{1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780,
                                                    2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159,
                                                    3.196, 3.230, 3.261, 3.291, 3.319};
}  // namespace detail

inline double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 20) throw Error("nemenyi: supported treatment counts are 2..20, got " + std::to_string(k));
  if (std::abs(alpha - 0.05) < 1e-9) return detail::nemenyi_q05[k - 2];
  if (std::abs(alpha - 0.10) < 1e-9) return detail::nemenyi_q10[k - 2];
  throw Error("nemenyi: unsupported alpha " + format_double(alpha) + " (supported: 0.05, 0.10)");
}

// CD = q_{alpha,k} * sqrt(k (k + 1) / (6 N))
inline double nemenyi_cd(std::size_t k, std::size_t n_blocks, double alpha) {
  if (n_blocks < 2) throw Error("nemenyi: need at least 2 blocks");
  const double kk = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n_blocks)));
}

enum class Verdict { better, indistinguishable, worse };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::better: return "better";
    case Verdict::indistinguishable: return "indistinguishable";
    case Verdict::worse: return "worse";
  }
  return "unknown";
}

// Indistinguishable iff |R_j - R_baseline| <= CD; otherwise lower mean rank is better.
inline std::vector<Verdict> compare_to_baseline(std::span<const double> mean_ranks, double cd, std::size_t baseline) {
  if (baseline >= mean_ranks.size()) throw Error("compare_to_baseline: baseline treatment not in treatment set");
  std::vector<Verdict> out;
  for (double r : mean_ranks) {
    const double diff = r - mean_ranks[baseline];
    if (std::abs(diff) <= cd * (1.0 + 1e-12))
      out.push_back(Verdict::indistinguishable);
    else
      out.push_back(diff < 0 ? Verdict::better : Verdict::worse);
  }
  return out;
}

}  // namespace retrainbench
