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

#ifndef QSTACK_MATRIX_HPP_
#define QSTACK_MATRIX_HPP_

#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qstack/levels.hpp"

namespace qstack {

// Dense row-major samples x features table.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw std::invalid_argument("feature matrix size mismatch");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Samples x levels table of predictive quantiles.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  PredictionMatrix(QuantileLevelGrid levels, std::size_t rows)
      : levels_(std::move(levels)), rows_(rows), values_(rows * levels_.size(), 0.0) {}

  const QuantileLevelGrid& levels() const { return levels_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return levels_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols(), cols()}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  bool operator==(const PredictionMatrix&) const = default;

 private:
  QuantileLevelGrid levels_;
  std::size_t rows_ = 0;
  std::vector<double> values_;
};

}  // namespace qstack

#endif  // QSTACK_MATRIX_HPP_
