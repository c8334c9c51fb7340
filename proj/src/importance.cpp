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

#include "qstack/importance.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "qstack/csv.hpp"
#include "qstack/gradient_boost.hpp"
#include "qstack/quantile_forest.hpp"
#include "qstack/scoring.hpp"

namespace qstack {

std::string_view statistic_name(ImportanceStatistic statistic) {
  return statistic == ImportanceStatistic::kSplitFrequency ? "split_frequency" : "total_gain";
}

std::string_view setting_name(ImportanceSetting setting) {
  return setting == ImportanceSetting::kRawFeatures ? "raw_features" : "stacked_predictions";
}

double split_depth_weight(int depth) {
  if (depth < 1 || depth > 4) return 0.0;
  return 1.0 / static_cast<double>(depth * depth);
}

std::vector<double> split_frequency_importance(const QuantileModel& model) {
  const auto* forest = dynamic_cast<const QuantileForestModel*>(&model);
  if (forest == nullptr) {
    throw std::invalid_argument("split frequency needs a quantile_forest model, got " +
                                std::string(kind_name(model.kind())));
  }
  std::vector<double> stat(model.feature_count(), 0.0);
  for (const ForestTree& t : forest->trees()) {
    for (const TreeNode& node : t.tree.nodes) {
      if (node.is_leaf()) continue;
      stat[static_cast<std::size_t>(node.feature)] += split_depth_weight(node.depth + 1);
    }
  }
  double total = 0.0;
  for (double v : stat) total += v;
  if (total > 0.0) {
    for (double& v : stat) v /= total;
  }
  return stat;
}

std::vector<std::vector<double>> total_gain_importance(const QuantileModel& model) {
  const auto* boost = dynamic_cast<const GradientBoostModel*>(&model);
  if (boost == nullptr) {
    throw std::invalid_argument("total gain needs a gradient_boost_pinball model, got " +
                                std::string(kind_name(model.kind())));
  }
  std::vector<std::vector<double>> out;
  for (const BoostLevel& level : boost->ensembles()) {
    std::vector<double> stat(model.feature_count(), 0.0);
    for (const BoostTree& t : level.trees) {
      for (std::size_t n = 0; n < t.tree.nodes.size(); ++n) {
        const TreeNode& node = t.tree.nodes[n];
        if (!node.is_leaf()) stat[static_cast<std::size_t>(node.feature)] += t.gain[n];
      }
    }
    out.push_back(std::move(stat));
  }
  return out;
}

ImportanceReport rank_predictors(ImportanceSetting setting, ImportanceStatistic statistic,
                                 const QuantileLevelGrid& levels,
                                 const std::vector<std::string>& predictors,
                                 const std::vector<std::vector<double>>& stats) {
  if (stats.size() != levels.size()) throw std::invalid_argument("importance level count mismatch");
  ImportanceReport report;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (stats[j].size() != predictors.size()) {
      throw std::invalid_argument("importance predictor count mismatch");
    }
    for (double v : stats[j]) {
      if (!std::isfinite(v)) throw std::invalid_argument("importance statistic is not finite");
    }
    const std::vector<int> ranks = rank_descending(stats[j]);
    for (std::size_t p = 0; p < predictors.size(); ++p) {
      report.rows.push_back({setting, statistic, levels[j], predictors[p], stats[j][p], ranks[p]});
    }
  }
  return report;
}

ImportanceReport model_importance(const QuantileModel& model, ImportanceSetting setting) {
  switch (model.kind()) {
    case LearnerKind::kQuantileForest:
      return rank_predictors(setting, ImportanceStatistic::kSplitFrequency, model.levels(),
                             model.feature_names(),
                             std::vector<std::vector<double>>(model.levels().size(),
                                                              split_frequency_importance(model)));
    case LearnerKind::kGradientBoostPinball:
      return rank_predictors(setting, ImportanceStatistic::kTotalGain, model.levels(),
                             model.feature_names(), total_gain_importance(model));
    default:
      return {};
  }
}

ImportanceReport combiner_importance(const StackedModel& stack) {
  const FittedCombiner& c = stack.combiner;
  if (c.spec.rule != CombinerRule::kLearner || c.level_models.empty()) return {};
  const LearnerKind kind = c.level_models.front()->kind();
  std::vector<std::vector<double>> stats;
  ImportanceStatistic statistic;
  if (kind == LearnerKind::kQuantileForest) {
    statistic = ImportanceStatistic::kSplitFrequency;
    for (const auto& m : c.level_models) stats.push_back(split_frequency_importance(*m));
  } else if (kind == LearnerKind::kGradientBoostPinball) {
    statistic = ImportanceStatistic::kTotalGain;
    for (const auto& m : c.level_models) stats.push_back(total_gain_importance(*m).front());
  } else {
    return {};
  }
  return rank_predictors(ImportanceSetting::kStackedPredictions, statistic, stack.levels,
                         stack.base_names, stats);
}

void append(ImportanceReport& into, const ImportanceReport& more) {
  into.rows.insert(into.rows.end(), more.rows.begin(), more.rows.end());
}

void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "setting,statistic,level,predictor,value,rank\n";
  for (const ImportanceRow& r : report.rows) {
    out << csv::join(std::vector<std::string>{std::string(setting_name(r.setting)), std::string(statistic_name(r.statistic)),
                      csv::format_double(r.level), r.predictor, csv::format_double(r.value),
                      std::to_string(r.rank)})
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace qstack
