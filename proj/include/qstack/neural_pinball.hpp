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

#ifndef QSTACK_NEURAL_PINBALL_HPP_
#define QSTACK_NEURAL_PINBALL_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qstack/learners.hpp"
#include "qstack/standardizer.hpp"

namespace qstack {

// z = y_center + y_scale * (b2 + sum_h w2_h tanh(b1_h + sum_f W1_hf x_f)),
// x standardized with training statistics.
struct NeuralWeights {
  std::vector<double> w1;  // hidden x features, row-major
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

class NeuralPinballModel final : public QuantileModel {
 public:
  NeuralPinballModel(LearnerSpec spec, QuantileLevelGrid levels,
                     std::vector<std::string> feature_names, Standardizer standardizer,
                     double y_center, double y_scale, std::vector<NeuralWeights> weights);

  const Standardizer& standardizer() const { return standardizer_; }
  double y_center() const { return y_center_; }
  double y_scale() const { return y_scale_; }
  const std::vector<NeuralWeights>& weights() const { return weights_; }
  // Exact training mean quantile score (standardized units) per epoch.
  std::vector<std::vector<double>> loss_trace;

 protected:
  void predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const override;

 private:
  Standardizer standardizer_;
  double y_center_;
  double y_scale_;
  std::vector<NeuralWeights> weights_;
};

std::shared_ptr<const NeuralPinballModel> fit_neural_pinball(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names);

}  // namespace qstack

#endif  // QSTACK_NEURAL_PINBALL_HPP_
