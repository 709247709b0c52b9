// Copyright 2026 The qdopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdopt/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qdopt {

namespace {

struct SplitResult {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
};

double subset_mean(const std::vector<double>& y,
                   const std::vector<int>& rows) {
  double sum = 0.0;
  for (const int r : rows) sum += y[r];
  return sum / static_cast<double>(rows.size());
}

double subset_sse(const std::vector<double>& y, const std::vector<int>& rows,
                  double mean) {
  double sse = 0.0;
  for (const int r : rows) {
    const double d = y[r] - mean;
    sse += d * d;
  }
  return sse;
}

}  // namespace

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& design,
                               const std::vector<double>& targets,
                               const ForestParams& params, Rng& rng) {
  const std::size_t n = design.size();
  if (n < 2) {
    throw std::invalid_argument("RandomForest::fit: needs at least two rows");
  }
  if (targets.size() != n) {
    throw std::invalid_argument("RandomForest::fit: targets/design mismatch");
  }
  const std::size_t dim = design.front().size();
  for (const auto& row : design) {
    if (row.size() != dim) {
      throw std::invalid_argument("RandomForest::fit: ragged design matrix");
    }
  }
  if (params.n_trees < 1) {
    throw std::invalid_argument("RandomForest::fit: n_trees must be positive");
  }

  const int mtry =
      params.split_candidates > 0
          ? std::min<int>(params.split_candidates, static_cast<int>(dim))
          : std::max<int>(1, static_cast<int>(std::ceil(
                                 std::sqrt(static_cast<double>(dim)))));
  const int min_leaf = std::max(1, params.min_leaf);

  RandomForest forest;
  forest.input_dim_ = dim;
  forest.roots_.reserve(params.n_trees);

  std::vector<int> rows;
  // Scratch buffers reused across nodes.
  std::vector<std::pair<double, double>> sorted;  // (x, y)

  auto find_split = [&](const std::vector<int>& node_rows,
                        double node_sse, Rng& tree_rng) -> SplitResult {
    SplitResult best;
    best.sse = node_sse;
    const auto candidates = tree_rng.sample_without_replacement(
        dim, static_cast<std::size_t>(mtry));
    for (const std::size_t f : candidates) {
      sorted.clear();
      for (const int r : node_rows) sorted.emplace_back(design[r][f], targets[r]);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;

      // Scan split positions between distinct x values using running sums.
      double left_sum = 0.0, left_sq = 0.0;
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& [x, y] : sorted) {
        total_sum += y;
        total_sq += y * y;
      }
      const std::size_t m = sorted.size();
      for (std::size_t i = 0; i + 1 < m; ++i) {
        left_sum += sorted[i].second;
        left_sq += sorted[i].second * sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const auto nl = static_cast<double>(i + 1);
        const auto nr = static_cast<double>(m - i - 1);
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse_l = std::max(0.0, left_sq - left_sum * left_sum / nl);
        const double sse_r = std::max(0.0, right_sq - right_sum * right_sum / nr);
        const double sse = sse_l + sse_r;
        if (sse < best.sse) {
          best.sse = sse;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        }
      }
    }
    return best;
  };

  auto grow = [&](auto&& self, std::vector<int> node_rows, int depth,
                  Rng& tree_rng) -> int {
    const double mean = subset_mean(targets, node_rows);
    const double sse = subset_sse(targets, node_rows, mean);
    const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if (node_rows.size() < 2 * static_cast<std::size_t>(min_leaf) ||
        sse <= 0.0 || depth_capped) {
      forest.nodes_.push_back(Node{-1, 0.0, -1, -1, mean});
      return static_cast<int>(forest.nodes_.size()) - 1;
    }
    const SplitResult split = find_split(node_rows, sse, tree_rng);
    if (split.feature < 0) {
      forest.nodes_.push_back(Node{-1, 0.0, -1, -1, mean});
      return static_cast<int>(forest.nodes_.size()) - 1;
    }
    std::vector<int> left_rows, right_rows;
    for (const int r : node_rows) {
      if (design[r][split.feature] <= split.threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    node_rows.clear();
    node_rows.shrink_to_fit();
    const int node = static_cast<int>(forest.nodes_.size());
    forest.nodes_.push_back(Node{split.feature, split.threshold, -1, -1, mean});
    const int left = self(self, std::move(left_rows), depth + 1, tree_rng);
    const int right = self(self, std::move(right_rows), depth + 1, tree_rng);
    forest.nodes_[node].left = left;
    forest.nodes_[node].right = right;
    return node;
  };

  for (int t = 0; t < params.n_trees; ++t) {
    // Per-tree generator drawn up front, so tree construction order is the
    // only consumer of the caller's stream.
    Rng tree_rng(rng.next());
    rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = static_cast<int>(tree_rng.index(n));
    }
    forest.roots_.push_back(grow(grow, rows, 0, tree_rng));
  }
  return forest;
}

double RandomForest::predict_tree(int root, std::span<const double> x) const {
  int node = root;
  while (nodes_[node].feature >= 0) {
    node = x[nodes_[node].feature] <= nodes_[node].threshold
               ? nodes_[node].left
               : nodes_[node].right;
  }
  return nodes_[node].value;
}

std::vector<double> RandomForest::tree_predictions(
    std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw std::invalid_argument("RandomForest::predict: input length mismatch");
  }
  std::vector<double> values;
  values.reserve(roots_.size());
  for (const int root : roots_) {
    values.push_back(predict_tree(root, x));
  }
  return values;
}

Prediction RandomForest::predict(std::span<const double> x) const {
  const std::vector<double> values = tree_predictions(x);
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(values.size());
  return Prediction{mean, std::max(0.0, var)};
}

}  // namespace qdopt
