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

#ifndef QSTACK_SCORING_HPP_
#define QSTACK_SCORING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qstack/levels.hpp"
#include "qstack/matrix.hpp"

namespace qstack {

// Quantile scoring function L_tau(z, y) = (z - y)(1{z >= y} - tau).
double pinball(double z, double y, double tau);

// Average of pinball over paired samples. Throws std::invalid_argument on a
// length mismatch or empty input.
double mean_pinball(std::span<const double> predictions, std::span<const double> observations,
                    double tau);

// Per-sample losses, for standard errors.
std::vector<double> pinball_losses(std::span<const double> predictions,
                                   std::span<const double> observations, double tau);

// 1 - score / benchmark. Throws std::invalid_argument unless benchmark > 0.
double skill_score(double score, double benchmark);

// Fraction of samples whose observation lies at or below the prediction
// (y <= z). The nominal value for a tau-quantile is tau.
double coverage(std::span<const double> predictions, std::span<const double> observations);

// Competition ranking in ascending order of the scores: rank 1 is the lowest
// score and tied scores share the smaller rank.
std::vector<int> rank_ascending(std::span<const double> scores);
// Same, in descending order (rank 1 is the largest value).
std::vector<int> rank_descending(std::span<const double> values);

struct NamedPredictions {
  std::string name;
  PredictionMatrix predictions;
};

struct ScoreRow {
  std::string algorithm;
  double level = 0.0;
  double mean_score = 0.0;
  double skill = 0.0;  // against the table's benchmark
  double coverage = 0.0;
  int rank = 0;

  bool operator==(const ScoreRow&) const = default;
};

struct ScoreTable {
  std::string benchmark;
  QuantileLevelGrid levels;
  // Level-major; inside a level ordered by rank, then algorithm name.
  std::vector<ScoreRow> rows;

  const ScoreRow* find(const std::string& algorithm, double level) const;
  bool operator==(const ScoreTable&) const = default;
};

// Scores every algorithm at every level. All prediction matrices must share
// one level grid and have one row per observation; the benchmark must be
// one of the algorithms.
ScoreTable score_algorithms(std::span<const NamedPredictions> algorithms,
                            std::span<const double> observations, const std::string& benchmark);

// Per-level mean score and standard error of a reference predictor (for
// example the true conditional quantiles of synthetic data).
struct ReferenceScore {
  double level = 0.0;
  double mean_score = 0.0;
  double standard_error = 0.0;
};
std::vector<ReferenceScore> reference_scores(const PredictionMatrix& predictions,
                                             std::span<const double> observations);

}  // namespace qstack

#endif  // QSTACK_SCORING_HPP_
