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

#ifndef QSTACK_QUANTILE_FOREST_HPP_
#define QSTACK_QUANTILE_FOREST_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qstack/decision_tree.hpp"
#include "qstack/learners.hpp"

namespace qstack {

struct ForestTree {
  DecisionTree tree;
  // Leaf n holds members[member_begin[n] .. member_end[n]): indices of all
  // training samples that fall into it (the held-out half for honest trees).
  std::vector<std::uint32_t> member_begin;
  std::vector<std::uint32_t> member_end;
  std::vector<std::uint32_t> members;
};

// Quantile regression forest. Trees are grown with variance-reduction
// splits; a prediction is the tau-quantile of the training targets weighted
// by w_i(x) = mean over trees of 1{i in leaf(x)} / |leaf(x)|.
class QuantileForestModel final : public QuantileModel {
 public:
  QuantileForestModel(LearnerSpec spec, QuantileLevelGrid levels,
                      std::vector<std::string> feature_names, std::vector<double> train_targets,
                      std::vector<ForestTree> trees);

  const std::vector<ForestTree>& trees() const { return trees_; }
  const std::vector<double>& train_targets() const { return targets_; }

 protected:
  void predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const override;

 private:
  std::vector<double> targets_;
  std::vector<ForestTree> trees_;
  std::vector<std::uint32_t> rank_;  // position of each target in sorted order
};

std::shared_ptr<const QuantileForestModel> fit_quantile_forest(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names);

}  // namespace qstack

#endif  // QSTACK_QUANTILE_FOREST_HPP_
