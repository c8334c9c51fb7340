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

#include "qstack/postprocess.hpp"

#include <algorithm>

namespace qstack {

PredictionMatrix clamp_nonnegative(PredictionMatrix m) {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
  return m;
}

PredictionMatrix rearrange_noncrossing(PredictionMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 1; j < row.size(); ++j) row[j] = std::max(row[j], row[j - 1]);
  }
  return m;
}

PredictionMatrix postprocess(PredictionMatrix m) {
  return rearrange_noncrossing(clamp_nonnegative(std::move(m)));
}

}  // namespace qstack
