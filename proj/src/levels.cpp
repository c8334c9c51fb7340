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

#include "qstack/levels.hpp"

#include <stdexcept>

#include "qstack/csv.hpp"

namespace qstack {

QuantileLevelGrid::QuantileLevelGrid(std::vector<double> levels)
    : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("quantile level grid is empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const double tau = levels_[i];
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("quantile level outside (0,1): " + csv::format_double(tau));
    }
    if (i > 0 && !(tau > levels_[i - 1])) {
      throw std::invalid_argument("quantile levels must be strictly increasing");
    }
  }
}

QuantileLevelGrid QuantileLevelGrid::full_default() {
  return QuantileLevelGrid({0.025, 0.050, 0.075, 0.100, 0.200, 0.300, 0.400, 0.500,
                            0.600, 0.700, 0.800, 0.900, 0.925, 0.950, 0.975});
}

QuantileLevelGrid QuantileLevelGrid::ci_default() {
  return QuantileLevelGrid({0.1, 0.5, 0.9});
}

QuantileLevelGrid QuantileLevelGrid::parse(std::string_view text) {
  if (text == "full") return full_default();
  if (text == "ci") return ci_default();
  std::vector<double> levels;
  for (const auto& field : csv::split_line(text)) {
    const auto value = csv::parse_double(field);
    if (!value) throw std::invalid_argument("cannot parse quantile level '" + field + "'");
    levels.push_back(*value);
  }
  return QuantileLevelGrid(std::move(levels));
}

std::optional<std::size_t> QuantileLevelGrid::index_of(double level) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i] == level) return i;
  }
  return std::nullopt;
}

std::string QuantileLevelGrid::label(std::size_t i) const {
  return csv::format_double(levels_.at(i));
}

std::string QuantileLevelGrid::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += label(i);
  }
  return out;
}

}  // namespace qstack
