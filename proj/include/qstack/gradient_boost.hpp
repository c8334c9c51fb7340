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

#ifndef QSTACK_GRADIENT_BOOST_HPP_
#define QSTACK_GRADIENT_BOOST_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qstack/decision_tree.hpp"
#include "qstack/learners.hpp"

namespace qstack {

struct BoostTree {
  DecisionTree tree;
  // Per node. value: shrunk additive update at leaves. loss: smoothed
  // quantile loss of the node's training residuals at their best constant
  // offset. gain: loss(node) - loss(left) - loss(right) at internal nodes.
  std::vector<double> value;
  std::vector<double> loss;
  std::vector<double> gain;
};

struct BoostLevel {
  double init = 0.0;
  std::vector<BoostTree> trees;
  // Exact training mean quantile score after 0, 1, ... rounds. Trees past
  // the best round are dropped.
  std::vector<double> loss_trace;
};

class GradientBoostModel final : public QuantileModel {
 public:
  GradientBoostModel(LearnerSpec spec, QuantileLevelGrid levels,
                     std::vector<std::string> feature_names, std::vector<BoostLevel> ensembles);

  // One ensemble per quantile level.
  const std::vector<BoostLevel>& ensembles() const { return ensembles_; }

 protected:
  void predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const override;

 private:
  std::vector<BoostLevel> ensembles_;
};

std::shared_ptr<const GradientBoostModel> fit_gradient_boost(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names);

}  // namespace qstack

#endif  // QSTACK_GRADIENT_BOOST_HPP_
