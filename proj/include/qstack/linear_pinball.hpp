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

#ifndef QSTACK_LINEAR_PINBALL_HPP_
#define QSTACK_LINEAR_PINBALL_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qstack/learners.hpp"
#include "qstack/standardizer.hpp"

namespace qstack {

// z_tau(x) = b_0 + sum_j b_j (x_j - mean_j) / scale_j, one coefficient
// vector per level.
class LinearPinballModel final : public QuantileModel {
 public:
  LinearPinballModel(LearnerSpec spec, QuantileLevelGrid levels,
                     std::vector<std::string> feature_names, Standardizer standardizer,
                     std::vector<std::vector<double>> coefficients);

  const Standardizer& standardizer() const { return standardizer_; }
  // coefficients()[level] = {intercept, b_1, ..., b_p}.
  const std::vector<std::vector<double>>& coefficients() const { return coefficients_; }
  // Exact training mean quantile score after each accepted iteration.
  std::vector<std::vector<double>> loss_trace;

 protected:
  void predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const override;

 private:
  Standardizer standardizer_;
  std::vector<std::vector<double>> coefficients_;
};

std::shared_ptr<const LinearPinballModel> fit_linear_pinball(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names);

}  // namespace qstack

#endif  // QSTACK_LINEAR_PINBALL_HPP_
