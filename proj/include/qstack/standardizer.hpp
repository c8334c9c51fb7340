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

#ifndef QSTACK_STANDARDIZER_HPP_
#define QSTACK_STANDARDIZER_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qstack/matrix.hpp"

namespace qstack {

// Column z-scores from training statistics. Constant columns get scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix& x) {
    Standardizer s;
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    s.mean.assign(p, 0.0);
    s.scale.assign(p, 1.0);
    if (n == 0) return s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) s.mean[j] += x(i, j);
    for (double& m : s.mean) m /= static_cast<double>(n);
    std::vector<double> ss(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) ss[j] += (x(i, j) - s.mean[j]) * (x(i, j) - s.mean[j]);
    for (std::size_t j = 0; j < p; ++j) {
      const double sd = std::sqrt(ss[j] / static_cast<double>(n));
      s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  double apply(std::size_t j, double v) const { return (v - mean[j]) / scale[j]; }
};

// Population standard deviation; 1 for a constant sample.
inline double spread(std::span<const double> y) {
  if (y.empty()) return 1.0;
  double m = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(y.size()));
  return sd > 0.0 ? sd : 1.0;
}

}  // namespace qstack

#endif  // QSTACK_STANDARDIZER_HPP_
