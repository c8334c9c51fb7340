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

#ifndef QSTACK_SMOOTH_PINBALL_HPP_
#define QSTACK_SMOOTH_PINBALL_HPP_

#include <span>

// Huber-smoothed quantile loss used as the training objective of the
// gradient-trained learners. Written in terms of the residual r = y - z:
//   rho(r) = w(r) * h(r),  w = tau for r > 0 and 1 - tau otherwise,
//   h(r) = r^2 / (2 delta) for |r| <= delta, |r| - delta / 2 beyond.
// With delta = 0 it is the exact quantile score.
namespace qstack::loss {

double smooth_pinball(double residual, double tau, double delta);
// d rho / d r.
double smooth_pinball_slope(double residual, double tau, double delta);

// Smallest v with at least ceil(tau * n) values <= v (inverse empirical CDF).
// Minimizes the exact quantile score over constants.
double empirical_quantile(std::span<const double> values, double tau);

struct ConstantFit {
  double value = 0.0;
  double loss = 0.0;  // summed, not averaged
};

// Minimizes sum_i rho(r_i - c) over the constant c.
ConstantFit minimize_constant(std::span<const double> residuals, double tau, double delta);

}  // namespace qstack::loss

#endif  // QSTACK_SMOOTH_PINBALL_HPP_
