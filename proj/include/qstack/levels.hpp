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

#ifndef QSTACK_LEVELS_HPP_
#define QSTACK_LEVELS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qstack {

// Ordered set of quantile levels, strictly increasing inside (0, 1).
class QuantileLevelGrid {
 public:
  QuantileLevelGrid() = default;
  // Throws std::invalid_argument unless the levels are non-empty, strictly
  // increasing and inside the open unit interval.
  explicit QuantileLevelGrid(std::vector<double> levels);

  // The 15 levels 0.025 ... 0.975 used by the reference application.
  static QuantileLevelGrid full_default();
  // {0.1, 0.5, 0.9}
  static QuantileLevelGrid ci_default();
  // Accepts "full", "ci" or a comma separated list such as "0.1,0.5,0.9".
  static QuantileLevelGrid parse(std::string_view text);

  std::span<const double> values() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  bool empty() const { return levels_.empty(); }
  double operator[](std::size_t i) const { return levels_[i]; }
  std::optional<std::size_t> index_of(double level) const;
  std::string label(std::size_t i) const;
  std::string to_string() const;

  bool operator==(const QuantileLevelGrid&) const = default;

 private:
  std::vector<double> levels_;
};

}  // namespace qstack

#endif  // QSTACK_LEVELS_HPP_
