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

#include "qstack/smooth_pinball.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qstack::loss {

double smooth_pinball(double residual, double tau, double delta) {
  const double w = residual > 0.0 ? tau : 1.0 - tau;
  const double a = std::abs(residual);
  if (a <= delta) return delta > 0.0 ? w * residual * residual / (2.0 * delta) : 0.0;
  return w * (a - 0.5 * delta);
}

double smooth_pinball_slope(double residual, double tau, double delta) {
  const double w = residual > 0.0 ? tau : 1.0 - tau;
  if (delta > 0.0 && std::abs(residual) <= delta) return w * residual / delta;
  if (residual > 0.0) return w;
  if (residual < 0.0) return -w;
  return 0.0;
}

double empirical_quantile(std::span<const double> values, double tau) {
  if (values.empty()) throw std::invalid_argument("empirical quantile of an empty sample");
  std::vector<double> copy(values.begin(), values.end());
  const auto n = static_cast<double>(copy.size());
  auto k = static_cast<std::size_t>(std::ceil(tau * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, copy.size());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
  return copy[k - 1];
}

ConstantFit minimize_constant(std::span<const double> residuals, double tau, double delta) {
  auto total_loss = [&](double c) {
    double s = 0.0;
    for (double r : residuals) s += smooth_pinball(r - c, tau, delta);
    return s;
  };
  double c = empirical_quantile(residuals, tau);
  if (delta <= 0.0) return {c, total_loss(c)};

  const auto [mn, mx] = std::minmax_element(residuals.begin(), residuals.end());
  double lo = *mn - delta;
  double hi = *mx + delta;
  for (int iter = 0; iter < 200; ++iter) {
    // f'(c) = -sum slope(r - c), nondecreasing in c; f''(c) counts points
    // inside the quadratic zone.
    double grad = 0.0;
    double curv = 0.0;
    for (double r : residuals) {
      const double u = r - c;
      grad -= smooth_pinball_slope(u, tau, delta);
      if (std::abs(u) <= delta) curv += (u > 0.0 ? tau : 1.0 - tau) / delta;
    }
    if (grad == 0.0) break;
    if (grad < 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    double next = curv > 0.0 ? c - grad / curv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - c) <= 1e-14 * (1.0 + std::abs(c))) {
      c = next;
      break;
    }
    c = next;
  }
  return {c, total_loss(c)};
}

}  // namespace qstack::loss
