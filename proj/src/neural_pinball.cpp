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

#include "qstack/neural_pinball.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "qstack/parallel.hpp"
#include "qstack/random.hpp"
#include "qstack/scoring.hpp"
#include "qstack/smooth_pinball.hpp"

namespace qstack {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Adam {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  int step = 0;

  explicit Adam(Eigen::Index size) : m(Eigen::ArrayXd::Zero(size)), v(Eigen::ArrayXd::Zero(size)) {}

  void update(Eigen::Ref<Eigen::ArrayXd> params, const Eigen::ArrayXd& grad, double lr) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++step;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.square();
    const double c1 = 1.0 - std::pow(kBeta1, step);
    const double c2 = 1.0 - std::pow(kBeta2, step);
    params -= lr * (m / c1) / ((v / c2).sqrt() + kEps);
  }
};

// Flat parameter layout: [W1 (h x p row-major), b1 (h), w2 (h), b2].
NeuralWeights unpack(const Eigen::ArrayXd& theta, Eigen::Index h, Eigen::Index p) {
  NeuralWeights w;
  w.w1.assign(theta.data(), theta.data() + h * p);
  w.b1.assign(theta.data() + h * p, theta.data() + h * p + h);
  w.w2.assign(theta.data() + h * p + h, theta.data() + h * p + 2 * h);
  w.b2 = theta(h * p + 2 * h);
  return w;
}

NeuralWeights fit_level(const RowMatrix& x, const Eigen::VectorXd& y, double tau,
                        const NeuralParams& params, std::uint64_t seed,
                        std::vector<double>& trace) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index h = params.hidden;
  const Eigen::Index size = h * p + 2 * h + 1;

  // Zero output weights: the starting network is the best constant.
  Eigen::ArrayXd theta = Eigen::ArrayXd::Zero(size);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(p, 1))));
  for (Eigen::Index k = 0; k < h * p; ++k) theta(k) = normal(rng);
  theta(size - 1) = loss::empirical_quantile({y.data(), static_cast<std::size_t>(n)}, tau);

  Adam adam(size);
  Eigen::ArrayXd best = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  const double s0 = params.smoothing;
  const double s1 = params.smoothing_final;
  const int epochs = params.epochs;

  RowMatrix hidden(n, h);
  Eigen::VectorXd z(n);
  Eigen::VectorXd dz(n);
  Eigen::ArrayXd grad(size);
  for (int epoch = 0; epoch <= epochs; ++epoch) {
    const Eigen::Map<const RowMatrix> w1(theta.data(), h, p);
    const Eigen::Map<const Eigen::VectorXd> b1(theta.data() + h * p, h);
    const Eigen::Map<const Eigen::VectorXd> w2(theta.data() + h * p + h, h);
    const double b2 = theta(size - 1);

    hidden.noalias() = x * w1.transpose();
    hidden.rowwise() += b1.transpose();
    hidden = hidden.array().tanh().matrix();
    z.noalias() = hidden * w2;
    z.array() += b2;

    double exact = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) exact += pinball(z(i), y(i), tau);
    exact /= static_cast<double>(n);
    trace.push_back(exact);
    if (exact < best_loss) {
      best_loss = exact;
      best = theta;
    }
    if (epoch == epochs) break;

    const double t = epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(epochs - 1) : 1.0;
    const double delta = s0 * std::pow(s1 / s0, t);
    for (Eigen::Index i = 0; i < n; ++i) {
      dz(i) = -loss::smooth_pinball_slope(y(i) - z(i), tau, delta) / static_cast<double>(n);
    }
    const RowMatrix dhidden =
        ((dz * w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();
    Eigen::Map<RowMatrix> g_w1(grad.data(), h, p);
    g_w1.noalias() = dhidden.transpose() * x;
    Eigen::Map<Eigen::VectorXd>(grad.data() + h * p, h) = dhidden.colwise().sum().transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + h * p + h, h).noalias() = hidden.transpose() * dz;
    grad(size - 1) = dz.sum();
    adam.update(theta, grad, params.learning_rate);
  }
  return unpack(best, h, p);
}

}  // namespace

NeuralPinballModel::NeuralPinballModel(LearnerSpec spec, QuantileLevelGrid levels,
                                       std::vector<std::string> feature_names,
                                       Standardizer standardizer, double y_center, double y_scale,
                                       std::vector<NeuralWeights> weights)
    : QuantileModel(std::move(spec), std::move(levels), std::move(feature_names)),
      standardizer_(std::move(standardizer)),
      y_center_(y_center),
      y_scale_(y_scale),
      weights_(std::move(weights)) {}

void NeuralPinballModel::predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const {
  const std::size_t p = x.cols();
  std::vector<double> xs(p);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t f = 0; f < p; ++f) xs[f] = standardizer_.apply(f, x(i, f));
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      const NeuralWeights& w = weights_[j];
      double z = w.b2;
      for (std::size_t k = 0; k < w.b1.size(); ++k) {
        double a = w.b1[k];
        for (std::size_t f = 0; f < p; ++f) a += w.w1[k * p + f] * xs[f];
        z += w.w2[k] * std::tanh(a);
      }
      out(i, j) = y_center_ + y_scale_ * z;
    }
  }
}

std::shared_ptr<const NeuralPinballModel> fit_neural_pinball(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names) {
  const auto& params = std::get<NeuralParams>(spec.params);
  Standardizer standardizer = Standardizer::fit(x);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  RowMatrix xs(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index f = 0; f < p; ++f)
      xs(i, f) = standardizer.apply(static_cast<std::size_t>(f),
                                    x(static_cast<std::size_t>(i), static_cast<std::size_t>(f)));

  double center = 0.0;
  for (double v : y) center += v;
  center /= static_cast<double>(y.size());
  const double scale = spread(y);
  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys(i) = (y[static_cast<std::size_t>(i)] - center) / scale;

  std::vector<NeuralWeights> weights(levels.size());
  std::vector<std::vector<double>> traces(levels.size());
  const auto kind = static_cast<std::uint64_t>(spec.kind());
  parallel_for(levels.size(), [&](std::size_t j) {
    weights[j] = fit_level(xs, ys, levels[j], params, derive_seed(spec.seed, kind, j), traces[j]);
  });
  auto model = std::make_shared<NeuralPinballModel>(spec, levels, std::move(feature_names),
                                                    std::move(standardizer), center, scale,
                                                    std::move(weights));
  model->loss_trace = std::move(traces);
  return model;
}

}  // namespace qstack
