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

#ifndef QSTACK_POSTPROCESS_HPP_
#define QSTACK_POSTPROCESS_HPP_

#include "qstack/matrix.hpp"

namespace qstack {

// Every value becomes max(value, 0).
PredictionMatrix clamp_nonnegative(PredictionMatrix m);

// Per row, left to right: z'_1 = z_1, z'_j = max(z_j, z'_{j-1}).
PredictionMatrix rearrange_noncrossing(PredictionMatrix m);

// clamp_nonnegative followed by rearrange_noncrossing.
PredictionMatrix postprocess(PredictionMatrix m);

}  // namespace qstack

#endif  // QSTACK_POSTPROCESS_HPP_
