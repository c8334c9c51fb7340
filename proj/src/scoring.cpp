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

#include "qstack/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace qstack {
namespace {

void check_pair(std::span<const double> predictions, std::span<const double> observations) {
  if (predictions.size() != observations.size()) {
    throw std::invalid_argument("predictions and observations differ in length");
  }
  if (predictions.empty()) throw std::invalid_argument("empty predictions");
}

}  // namespace

double pinball(double z, double y, double tau) {
  return (z - y) * ((z >= y ? 1.0 : 0.0) - tau);
}

double mean_pinball(std::span<const double> predictions, std::span<const double> observations,
                    double tau) {
  check_pair(predictions, observations);
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    total += pinball(predictions[i], observations[i], tau);
  }
  return total / static_cast<double>(predictions.size());
}

std::vector<double> pinball_losses(std::span<const double> predictions,
                                   std::span<const double> observations, double tau) {
  check_pair(predictions, observations);
  std::vector<double> out(predictions.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pinball(predictions[i], observations[i], tau);
  return out;
}

double skill_score(double score, double benchmark) {
  if (!(benchmark > 0.0)) {
    throw std::invalid_argument("skill score needs a positive benchmark score");
  }
  return 1.0 - score / benchmark;
}

double coverage(std::span<const double> predictions, std::span<const double> observations) {
  check_pair(predictions, observations);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (observations[i] <= predictions[i]) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(predictions.size());
}

std::vector<int> rank_ascending(std::span<const double> scores) {
  std::vector<int> ranks(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int better = 0;
    for (double other : scores) {
      if (other < scores[i]) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

std::vector<int> rank_descending(std::span<const double> values) {
  std::vector<double> negated(values.size());
  std::transform(values.begin(), values.end(), negated.begin(), [](double v) { return -v; });
  return rank_ascending(negated);
}

const ScoreRow* ScoreTable::find(const std::string& algorithm, double level) const {
  for (const auto& row : rows) {
    if (row.algorithm == algorithm && row.level == level) return &row;
  }
  return nullptr;
}

ScoreTable score_algorithms(std::span<const NamedPredictions> algorithms,
                            std::span<const double> observations, const std::string& benchmark) {
  if (algorithms.empty()) throw std::invalid_argument("no algorithms to score");
  const QuantileLevelGrid& levels = algorithms.front().predictions.levels();
  std::size_t bench_index = algorithms.size();
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    const auto& p = algorithms[a].predictions;
    if (!(p.levels() == levels)) {
      throw std::invalid_argument("algorithm " + algorithms[a].name + " uses a different level grid");
    }
    if (p.rows() != observations.size()) {
      throw std::invalid_argument("algorithm " + algorithms[a].name +
                                  " has the wrong number of predictions");
    }
    if (algorithms[a].name == benchmark) bench_index = a;
  }
  if (bench_index == algorithms.size()) {
    throw std::invalid_argument("benchmark '" + benchmark + "' is not among the algorithms");
  }

  ScoreTable table;
  table.benchmark = benchmark;
  table.levels = levels;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double tau = levels[j];
    std::vector<double> means(algorithms.size());
    std::vector<double> covers(algorithms.size());
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      const auto column = algorithms[a].predictions.column(j);
      means[a] = mean_pinball(column, observations, tau);
      covers[a] = coverage(column, observations);
    }
    const auto ranks = rank_ascending(means);
    std::vector<ScoreRow> level_rows;
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      level_rows.push_back({algorithms[a].name, tau, means[a],
                            skill_score(means[a], means[bench_index]), covers[a], ranks[a]});
    }
    std::sort(level_rows.begin(), level_rows.end(), [](const ScoreRow& x, const ScoreRow& y) {
      return std::tie(x.rank, x.algorithm) < std::tie(y.rank, y.algorithm);
    });
    table.rows.insert(table.rows.end(), level_rows.begin(), level_rows.end());
  }
  return table;
}

std::vector<ReferenceScore> reference_scores(const PredictionMatrix& predictions,
                                             std::span<const double> observations) {
  std::vector<ReferenceScore> out;
  const std::size_t n = observations.size();
  for (std::size_t j = 0; j < predictions.cols(); ++j) {
    const double tau = predictions.levels()[j];
    const auto losses = pinball_losses(predictions.column(j), observations, tau);
    const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double l : losses) ss += (l - mean) * (l - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    out.push_back({tau, mean, sd / std::sqrt(static_cast<double>(n))});
  }
  return out;
}

}  // namespace qstack
