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

#ifndef QDOPT_SURROGATE_HPP_
#define QDOPT_SURROGATE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "qdopt/rng.hpp"

namespace qdopt {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;       // 0 = unbounded
  int min_leaf = 1;
  int split_candidates = 0;  // 0 = ceil(sqrt(#inputs))
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // spread of per-tree means; 0 for unanimous trees
};

/// Bagged regression trees with the per-tree-mean variance estimate.
///
/// Each tree is a CART regression tree grown on a bootstrap resample with a
/// random feature subset considered at every split. Training is sequential
/// and fully determined by the caller's rng, so a fixed seed reproduces the
/// model bit for bit.
class RandomForest {
 public:
  /// Requires at least two rows of equal length; throws
  /// std::invalid_argument otherwise.
  static RandomForest fit(const std::vector<std::vector<double>>& design,
                          const std::vector<double>& targets,
                          const ForestParams& params, Rng& rng);

  /// Mean and empirical variance of the per-tree predictions. Inputs outside
  /// the training range follow the tree structure to a leaf (no
  /// extrapolation).
  Prediction predict(std::span<const double> x) const;

  /// The individual tree outputs behind predict(), in tree order.
  std::vector<double> tree_predictions(std::span<const double> x) const;

  std::size_t input_dim() const { return input_dim_; }
  int tree_count() const { return static_cast<int>(roots_.size()); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  double predict_tree(int root, std::span<const double> x) const;

  std::size_t input_dim_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
};

}  // namespace qdopt

#endif  // QDOPT_SURROGATE_HPP_
