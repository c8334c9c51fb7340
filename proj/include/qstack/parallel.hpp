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

#ifndef QSTACK_PARALLEL_HPP_
#define QSTACK_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace qstack {

// Number of worker threads used by parallel_for. 0 selects the hardware
// concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

// Runs body(i) for i in [0, count). Each index must write only to its own
// output slot, which keeps results independent of scheduling. If any call
// throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body);

}  // namespace qstack

#endif  // QSTACK_PARALLEL_HPP_
