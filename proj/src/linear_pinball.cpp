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

#include "qstack/linear_pinball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "qstack/parallel.hpp"
#include "qstack/scoring.hpp"
#include "qstack/smooth_pinball.hpp"

namespace qstack {
namespace {

double training_loss(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta,
                     std::span<const double> y, double tau) {
  const Eigen::VectorXd z = design * beta;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += pinball(z(static_cast<Eigen::Index>(i)), y[i], tau);
  return total / static_cast<double>(y.size());
}

// IRLS on the asymmetric absolute loss: each step solves the weighted least
// squares problem with weights w_i = c_i / max(|r_i|, eps), which majorizes
// the floored objective at the current residuals. Starts from the best
// constant and returns the best iterate seen under the exact score.
std::vector<double> fit_level(const Eigen::MatrixXd& design, std::span<const double> y, double tau,
                              const LinearParams& params, std::vector<double>& trace) {
  const auto n = design.rows();
  const auto k = design.cols();
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
  const double eps = params.smoothing * spread(y);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  beta(0) = loss::empirical_quantile(y, tau);
  Eigen::VectorXd best = beta;
  double best_loss = training_loss(design, beta, y, tau);
  trace.push_back(best_loss);

  Eigen::VectorXd weights(n);
  int stalled = 0;
  for (int iter = 0; iter < params.max_iterations && best_loss > 0.0; ++iter) {
    const Eigen::VectorXd residual = target - design * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = residual(i);
      weights(i) = (r > 0.0 ? tau : 1.0 - tau) / std::max(std::abs(r), eps);
    }
    const Eigen::MatrixXd weighted = design.array().colwise() * weights.array();
    Eigen::MatrixXd normal = design.transpose() * weighted;
    const double ridge = 1e-12 * normal.trace() / static_cast<double>(k);
    for (Eigen::Index j = 1; j < k; ++j) normal(j, j) += ridge;
    const Eigen::VectorXd rhs = weighted.transpose() * target;
    const Eigen::VectorXd next = normal.ldlt().solve(rhs);
    if (!next.allFinite()) break;
    beta = next;

    const double loss = training_loss(design, beta, y, tau);
    if (loss < best_loss) {
      stalled = (best_loss - loss) <= params.tolerance * (1.0 + best_loss) ? stalled + 1 : 0;
      best_loss = loss;
      best = beta;
      trace.push_back(loss);
    } else {
      ++stalled;
    }
    if (stalled >= 5) break;
  }
  return {best.data(), best.data() + k};
}

}  // namespace

LinearPinballModel::LinearPinballModel(LearnerSpec spec, QuantileLevelGrid levels,
                                       std::vector<std::string> feature_names,
                                       Standardizer standardizer,
                                       std::vector<std::vector<double>> coefficients)
    : QuantileModel(std::move(spec), std::move(levels), std::move(feature_names)),
      standardizer_(std::move(standardizer)),
      coefficients_(std::move(coefficients)) {}

void LinearPinballModel::predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < coefficients_.size(); ++j) {
      const auto& b = coefficients_[j];
      double z = b[0];
      for (std::size_t f = 0; f < x.cols(); ++f) z += b[f + 1] * standardizer_.apply(f, x(i, f));
      out(i, j) = z;
    }
  }
}

std::shared_ptr<const LinearPinballModel> fit_linear_pinball(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names) {
  const auto& params = std::get<LinearParams>(spec.params);
  Standardizer standardizer = Standardizer::fit(x);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd design(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (Eigen::Index f = 0; f < p; ++f) {
      design(i, f + 1) = standardizer.apply(static_cast<std::size_t>(f),
                                            x(static_cast<std::size_t>(i), static_cast<std::size_t>(f)));
    }
  }

  std::vector<std::vector<double>> coefficients(levels.size());
  std::vector<std::vector<double>> traces(levels.size());
  parallel_for(levels.size(), [&](std::size_t j) {
    coefficients[j] = fit_level(design, y, levels[j], params, traces[j]);
  });
  auto model = std::make_shared<LinearPinballModel>(spec, levels, std::move(feature_names),
                                                    std::move(standardizer),
                                                    std::move(coefficients));
  model->loss_trace = std::move(traces);
  return model;
}

}  // namespace qstack
