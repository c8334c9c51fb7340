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

#ifndef QSTACK_EXPERIMENT_HPP_
#define QSTACK_EXPERIMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qstack/config.hpp"
#include "qstack/dataset.hpp"
#include "qstack/importance.hpp"
#include "qstack/matrix.hpp"
#include "qstack/report.hpp"
#include "qstack/scoring.hpp"

namespace qstack {

struct ExperimentData {
  Dataset data;
  std::optional<PredictionMatrix> truth;  // aligned with data
  std::size_t dropped = 0;
  std::size_t rejected = 0;
};

// Generates or loads the configured data.
ExperimentData load_experiment_data(const ExperimentConfig& config);

// One call to a learner's fit: which algorithm, at which stage, on which
// rows of the experiment data.
struct FitRecord {
  std::string stage;
  std::string learner;
  std::vector<std::size_t> row_ids;
};

struct ExperimentOptions {
  bool write_outputs = true;
  std::function<void(std::string_view)> log;  // progress messages, optional
};

struct ExperimentResult {
  ScoreReport scores;
  ImportanceReport importance;
  SplitPlan split;
  Dataset test;
  std::optional<PredictionMatrix> test_truth;
  // Post-processed test predictions, bases first, then combiners.
  std::vector<NamedPredictions> test_predictions;
  std::vector<FitRecord> fit_audit;
  std::vector<std::filesystem::path> outputs;
};

// Three-way split of the data; bases fit on set 1 and predict set 2; every
// combiner trained on the set-2 predictions; bases refit on sets 1 and 2;
// all algorithms predict set 3, are post-processed and scored. Failures are
// rethrown as std::runtime_error prefixed with the stage name.
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options = {});
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                const ExperimentOptions& options = {});

}  // namespace qstack

#endif  // QSTACK_EXPERIMENT_HPP_
