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

#include "qstack/decision_tree.hpp"

namespace qstack {

std::size_t DecisionTree::leaf_of(std::span<const double> x) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf()) {
    const TreeNode& node = nodes[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return n;
}

std::size_t DecisionTree::leaf_of(const FeatureMatrix& x, std::size_t row) const {
  return leaf_of(x.row(row));
}

}  // namespace qstack
