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

#ifndef QSTACK_RANDOM_HPP_
#define QSTACK_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace qstack {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a parent seed and up to two tags.
// Streams depend only on their tags, never on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

// Stream tags used across modules.
namespace stream {
inline constexpr std::uint64_t kStackSplit = 0x51;
inline constexpr std::uint64_t kCombiner = 0x52;
inline constexpr std::uint64_t kForestTree = 0x61;
inline constexpr std::uint64_t kBoostSubsample = 0x62;
inline constexpr std::uint64_t kNeuralInit = 0x63;
inline constexpr std::uint64_t kLearnerLevel = 0x64;
inline constexpr std::uint64_t kSynthetic = 0x71;
}  // namespace stream

}  // namespace qstack

#endif  // QSTACK_RANDOM_HPP_
