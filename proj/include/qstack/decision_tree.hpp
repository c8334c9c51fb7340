/*
 * Copyright 2026 The qstack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QSTACK_DECISION_TREE_HPP_
#define QSTACK_DECISION_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qstack/matrix.hpp"

namespace qstack {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t depth = 0;     // root is 0

  bool is_leaf() const { return feature < 0; }
};

// Binary axis-aligned tree; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_of(std::span<const double> x) const;
  std::size_t leaf_of(const FeatureMatrix& x, std::size_t row) const;
};

}  // namespace qstack

#endif  // QSTACK_DECISION_TREE_HPP_
