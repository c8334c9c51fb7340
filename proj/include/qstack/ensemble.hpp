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

#ifndef QSTACK_ENSEMBLE_HPP_
#define QSTACK_ENSEMBLE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qstack/dataset.hpp"
#include "qstack/learners.hpp"
#include "qstack/levels.hpp"
#include "qstack/matrix.hpp"

namespace qstack {

enum class CombinerRule { kLearner, kMean, kMedian, kBest };

// "learner", "mean", "median", "best".
std::string_view rule_name(CombinerRule rule);
CombinerRule parse_rule(std::string_view name);

struct CombinerSpec {
  std::string name;
  CombinerRule rule = CombinerRule::kMean;
  std::optional<LearnerSpec> learner;  // set exactly when rule is kLearner

  static CombinerSpec mean(std::string name = "mean");
  static CombinerSpec median(std::string name = "median");
  static CombinerSpec best(std::string name = "best");
  static CombinerSpec learner_based(std::string name, LearnerSpec learner);
};

struct FittedCombiner {
  CombinerSpec spec;
  std::size_t inputs = 0;  // number of base learners
  // kLearner: one single-level model per quantile level, trained on the
  // base predictions at that level.
  std::vector<TrainedModel> level_models;
  // kBest: selected base index per level.
  std::vector<std::size_t> best_index;
};

struct EnsembleSpec {
  std::string name;
  std::vector<LearnerSpec> base_specs;
  CombinerSpec combiner;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument for an empty roster, duplicate base names or
// an inconsistent combiner.
void validate(const EnsembleSpec& spec);

struct StackedModel {
  std::string name;
  QuantileLevelGrid levels;
  std::vector<std::string> feature_names;
  std::vector<std::string> base_names;
  std::vector<TrainedModel> full_base_models;  // refit on the full training set
  FittedCombiner combiner;
};

double combine_mean(std::span<const double> values);
// Midpoint of the two central values for an even count.
double combine_median(std::span<const double> values);
// Index of the smallest score; ties go to the earliest.
std::size_t select_best(std::span<const double> scores);
// scores[level][base] -> best base per level.
std::vector<std::size_t> select_best(const std::vector<std::vector<double>>& scores);

// Trains a combiner on out-of-sample base predictions (one matrix per base,
// rows aligned with `targets`).
FittedCombiner fit_combiner(const CombinerSpec& spec, std::span<const PredictionMatrix> base_predictions,
                            std::span<const double> targets, const QuantileLevelGrid& levels,
                            std::uint64_t seed);
// Applies a fitted combiner to base predictions in roster order.
PredictionMatrix combine(const FittedCombiner& combiner,
                         std::span<const PredictionMatrix> base_predictions);

// Stacking on a training set: random halves, bases fit on the first half
// and predicting the second, combiner fit on those predictions, bases refit
// on everything.
StackedModel fit_stack(const EnsembleSpec& spec, const Dataset& train,
                       const QuantileLevelGrid& levels);
PredictionMatrix predict_stack(const StackedModel& model, const FeatureMatrix& x);
PredictionMatrix predict_stack(const StackedModel& model, const Dataset& data);

// Writes <dir>/<name>.stack.json, <dir>/<base>.qsm per base and one artifact
// per combiner level; returns the manifest path. With write_bases false the
// base artifacts are assumed to exist already.
std::filesystem::path save_stack(const StackedModel& model, const std::filesystem::path& dir,
                                 bool write_bases = true);
StackedModel load_stack(const std::filesystem::path& manifest);

}  // namespace qstack

#endif  // QSTACK_ENSEMBLE_HPP_
