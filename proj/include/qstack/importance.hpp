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

#ifndef QSTACK_IMPORTANCE_HPP_
#define QSTACK_IMPORTANCE_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qstack/ensemble.hpp"
#include "qstack/learners.hpp"
#include "qstack/levels.hpp"

namespace qstack {

enum class ImportanceStatistic { kSplitFrequency, kTotalGain };
enum class ImportanceSetting { kRawFeatures, kStackedPredictions };

std::string_view statistic_name(ImportanceStatistic statistic);  // split_frequency, total_gain
std::string_view setting_name(ImportanceSetting setting);        // raw_features, stacked_predictions

// Depth weight for a split at depth d (root = 1): d^-2 up to depth 4, then 0.
double split_depth_weight(int depth);

// Weighted count of splits per predictor over all trees of a forest,
// normalized to sum to 1 when any weighted split exists. Throws
// std::invalid_argument for other model kinds.
std::vector<double> split_frequency_importance(const QuantileModel& forest);

// Per level, the summed loss reduction of all splits on each predictor.
// Throws std::invalid_argument for other model kinds.
std::vector<std::vector<double>> total_gain_importance(const QuantileModel& boost);

struct ImportanceRow {
  ImportanceSetting setting = ImportanceSetting::kRawFeatures;
  ImportanceStatistic statistic = ImportanceStatistic::kSplitFrequency;
  double level = 0.0;
  std::string predictor;
  double value = 0.0;
  int rank = 0;
  bool operator==(const ImportanceRow&) const = default;
};

struct ImportanceReport {
  // Setting, statistic and level major; predictors in input order inside.
  std::vector<ImportanceRow> rows;
  bool operator==(const ImportanceReport&) const = default;
};

// Rank 1 is the largest statistic; tied values share the smaller rank.
// stats[level][predictor].
ImportanceReport rank_predictors(ImportanceSetting setting, ImportanceStatistic statistic,
                                 const QuantileLevelGrid& levels,
                                 const std::vector<std::string>& predictors,
                                 const std::vector<std::vector<double>>& stats);

// Importance of a tree-based model over its own predictors; empty for
// other kinds.
ImportanceReport model_importance(const QuantileModel& model, ImportanceSetting setting);
// Importance of the base-learner predictions inside a learner combiner;
// empty unless the combiner is a forest or boosting learner.
ImportanceReport combiner_importance(const StackedModel& stack);

void append(ImportanceReport& into, const ImportanceReport& more);

// Columns: setting, statistic, level, predictor, value, rank.
void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path);

}  // namespace qstack

#endif  // QSTACK_IMPORTANCE_HPP_
