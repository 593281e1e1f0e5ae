#pragma once

// Regression trees grown level-wise with exact greedy splits over presorted feature columns.
// Shared by the gradient-boosting and random-forest learners.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "retrainbench/core.hpp"
#include "retrainbench/random.hpp"

namespace retrainbench {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class RegressionTree {
 public:
  double predict(std::span<const double> row) const {
    int k = 0;
    while (nodes_[k].feature >= 0) k = row[nodes_[k].feature] <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
    return nodes_[k].value;
  }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// Column-major copy of a row-major design with per-feature ascending row orders.
class PresortedDesign {
 public:
  PresortedDesign(std::span<const double> row_major, std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), columns_(rows * cols), order_(cols) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) columns_[c * rows + r] = row_major[r * cols + c];
    for (std::size_t c = 0; c < cols; ++c) {
      auto& ord = order_[c];
      ord.resize(rows);
      std::iota(ord.begin(), ord.end(), 0u);
      const double* col = &columns_[c * rows];
      std::stable_sort(ord.begin(), ord.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return columns_[c * rows_ + r]; }
  const std::vector<std::uint32_t>& order(std::size_t c) const { return order_[c]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> columns_;
  std::vector<std::vector<std::uint32_t>> order_;
};

struct TreeParams {
  int max_depth = 3;
  double min_leaf = 1.0;          // minimum total row weight per child
  std::size_t features_per_split = 0;  // 0 = all features
};

// Fits a squared-error tree to `target` with nonnegative row `weight` (0 excludes a row).
// `rng` is used only when features_per_split subsamples columns.
inline RegressionTree grow_tree(const PresortedDesign& design, std::span<const double> target,
                                std::span<const double> weight, const TreeParams& params, Rng* rng = nullptr) {
  const std::size_t n = design.rows();
  const std::size_t d = design.cols();
  if (params.max_depth < 1) throw Error("tree: depth must be >= 1");
  RegressionTree tree;
  auto& nodes = tree.nodes();

  struct Stats {
    double sum = 0.0;
    double weight = 0.0;
  };
  std::vector<int> node_of(n, -1);
  Stats root;
  for (std::size_t r = 0; r < n; ++r)
    if (weight[r] > 0.0) {
      node_of[r] = 0;
      root.sum += weight[r] * target[r];
      root.weight += weight[r];
    }
  if (root.weight <= 0.0) throw Error("tree: no rows with positive weight");
  nodes.push_back(TreeNode{-1, 0.0, -1, -1, root.sum / root.weight});
  std::vector<Stats> totals{root};
  std::vector<int> frontier{0};

  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    // Slot per frontier node; node_of maps rows to node ids, so keep an id -> slot map.
    std::vector<int> slot_of(nodes.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) slot_of[frontier[k]] = static_cast<int>(k);

    struct Best {
      double gain = 0.0;
      int feature = -1;
      double threshold = 0.0;
      Stats left;
    };
    std::vector<Best> best(frontier.size());

    // Per-node candidate feature sets.
    std::vector<std::vector<char>> allowed;
    if (params.features_per_split > 0 && params.features_per_split < d) {
      if (!rng) throw Error("tree: feature subsampling requires a random generator");
      allowed.assign(frontier.size(), std::vector<char>(d, 0));
      std::vector<std::size_t> idx(d);
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        std::iota(idx.begin(), idx.end(), 0u);
        for (std::size_t j = 0; j < params.features_per_split; ++j) {
          std::swap(idx[j], idx[j + rng->below(d - j)]);
          allowed[k][idx[j]] = 1;
        }
      }
    }

    std::vector<Stats> acc(frontier.size());
    std::vector<double> last(frontier.size());
    std::vector<char> seen(frontier.size());
    for (std::size_t c = 0; c < d; ++c) {
      std::fill(acc.begin(), acc.end(), Stats{});
      std::fill(seen.begin(), seen.end(), 0);
      for (std::uint32_t r : design.order(c)) {
        const int node = node_of[r];
        if (node < 0) continue;
        const int k = slot_of[node];
        if (k < 0) continue;
        if (!allowed.empty() && !allowed[k][c]) continue;
        const double v = design.at(r, c);
        if (seen[k] && v > last[k]) {
          const Stats& tot = totals[k];
          const Stats& l = acc[k];
          const double wr = tot.weight - l.weight;
          if (l.weight >= params.min_leaf && wr >= params.min_leaf) {
            const double sr = tot.sum - l.sum;
            const double gain = l.sum * l.sum / l.weight + sr * sr / wr - tot.sum * tot.sum / tot.weight;
            if (gain > best[k].gain + 1e-12 * std::abs(best[k].gain)) {
              double thr = last[k] + (v - last[k]) / 2.0;
              if (!(thr < v)) thr = last[k];
              best[k] = Best{gain, static_cast<int>(c), thr, l};
            }
          }
        }
        acc[k].sum += weight[r] * target[r];
        acc[k].weight += weight[r];
        last[k] = v;
        seen[k] = 1;
      }
    }

    std::vector<int> next_frontier;
    std::vector<Stats> next_totals;
    std::vector<int> left_id(frontier.size(), -1), right_id(frontier.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (best[k].feature < 0 || best[k].gain <= 0.0) continue;
      const int id = frontier[k];
      const Stats l = best[k].left;
      const Stats rs{totals[k].sum - l.sum, totals[k].weight - l.weight};
      left_id[k] = static_cast<int>(nodes.size());
      nodes.push_back(TreeNode{-1, 0.0, -1, -1, l.sum / l.weight});
      right_id[k] = static_cast<int>(nodes.size());
      nodes.push_back(TreeNode{-1, 0.0, -1, -1, rs.sum / rs.weight});
      nodes[id].feature = best[k].feature;
      nodes[id].threshold = best[k].threshold;
      nodes[id].left = left_id[k];
      nodes[id].right = right_id[k];
      next_frontier.push_back(left_id[k]);
      next_totals.push_back(l);
      next_frontier.push_back(right_id[k]);
      next_totals.push_back(rs);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const int node = node_of[r];
      if (node < 0) continue;
      const int k = node < static_cast<int>(slot_of.size()) ? slot_of[node] : -1;
      if (k < 0) continue;
      if (left_id[k] < 0) {
        node_of[r] = -1;  // settled in a leaf
        continue;
      }
      const auto& split = nodes[frontier[k]];
      node_of[r] = design.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_id[k] : right_id[k];
    }
    frontier = std::move(next_frontier);
    totals = std::move(next_totals);
  }
  return tree;
}

}  // namespace retrainbench
