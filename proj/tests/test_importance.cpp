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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "qstack/ensemble.hpp"
#include "qstack/gradient_boost.hpp"
#include "qstack/importance.hpp"
#include "qstack/quantile_forest.hpp"
#include "test_support.hpp"

namespace qstack {
namespace {

using testing::heteroscedastic;

TreeNode split(int feature, int depth, int left, int right) {
  TreeNode n;
  n.feature = feature;
  n.threshold = 0.5;
  n.depth = depth;
  n.left = left;
  n.right = right;
  return n;
}

TreeNode leaf(int depth) {
  TreeNode n;
  n.depth = depth;
  return n;
}

ForestTree forest_tree(std::vector<TreeNode> nodes) {
  ForestTree t;
  t.tree.nodes = std::move(nodes);
  t.member_begin.assign(t.tree.nodes.size(), 0);
  t.member_end.assign(t.tree.nodes.size(), 1);
  t.members = {0};
  return t;
}

TEST(DepthWeight, InverseSquareUpToFour) {
  EXPECT_EQ(split_depth_weight(1), 1.0);
  EXPECT_EQ(split_depth_weight(2), 0.25);
  EXPECT_DOUBLE_EQ(split_depth_weight(3), 1.0 / 9.0);
  EXPECT_EQ(split_depth_weight(4), 1.0 / 16.0);
  EXPECT_EQ(split_depth_weight(5), 0.0);
  EXPECT_EQ(split_depth_weight(0), 0.0);
}

TEST(SplitFrequency, HandBuiltTwoTreeForest) {
  // Tree A: f0 at the root, f1 below it.
  const ForestTree a = forest_tree({split(0, 0, 1, 2), split(1, 1, 3, 4), leaf(1), leaf(2), leaf(2)});
  // Tree B: f1 at the root, f2 at depth 1, f0 at depth 2, f2 at depth 4 (weight 0).
  const ForestTree b = forest_tree({split(1, 0, 1, 2), leaf(1), split(2, 1, 3, 4), split(0, 2, 5, 6),
                                    leaf(2), split(2, 3, 7, 8), leaf(3), split(2, 4, 9, 10), leaf(4),
                                    leaf(5), leaf(5)});
  const QuantileForestModel model(make_learner_spec("f", LearnerKind::kQuantileForest),
                                  QuantileLevelGrid({0.5}), {"a", "b", "c"}, {1.0}, {a, b});
  const auto stat = split_frequency_importance(model);
  // Raw: f0 = 1 + 1/9, f1 = 1/4 + 1, f2 = 1/4 + 1/16.
  const double f0 = 1 + 1.0 / 9, f1 = 1.25, f2 = 0.25 + 1.0 / 16;
  const double total = f0 + f1 + f2;
  ASSERT_EQ(stat.size(), 3u);
  EXPECT_NEAR(stat[0], f0 / total, 1e-15);
  EXPECT_NEAR(stat[1], f1 / total, 1e-15);
  EXPECT_NEAR(stat[2], f2 / total, 1e-15);

  const QuantileForestModel reversed(make_learner_spec("f", LearnerKind::kQuantileForest),
                                     QuantileLevelGrid({0.5}), {"a", "b", "c"}, {1.0}, {b, a});
  const auto again = split_frequency_importance(reversed);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(again[j], stat[j], 1e-15);
}

TEST(SplitFrequency, StumpsOnOneFeature) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  FeatureMatrix x(300, 4);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t f = 0; f < 4; ++f) x(i, f) = u(rng);
    y[i] = x(i, 2) > 0.5 ? 10 : 0;
  }
  const auto spec = make_learner_spec("stumps", LearnerKind::kQuantileForest,
                                      {{"trees", 20}, {"max_depth", 1}, {"mtry", 4}}, 3);
  const auto model = fit(spec, x, y, QuantileLevelGrid::ci_default());
  EXPECT_EQ(split_frequency_importance(*model), (std::vector<double>{0, 0, 1, 0}));
}

TEST(SplitFrequency, NoSplitsGivesZerosAndSharedRank) {
  const Dataset base = heteroscedastic(100, 3, 2);
  const std::vector<double> y(base.size(), 4.0);
  const auto levels = QuantileLevelGrid::ci_default();
  const auto model = fit(make_learner_spec("f", LearnerKind::kQuantileForest, {{"trees", 5}}),
                         base.features(), y, levels);
  EXPECT_EQ(split_frequency_importance(*model), (std::vector<double>{0, 0, 0}));
  const auto report = model_importance(*model, ImportanceSetting::kRawFeatures);
  ASSERT_EQ(report.rows.size(), 9u);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.rank, 1);
    EXPECT_EQ(r.value, 0.0);
  }
}

TEST(SplitFrequency, RejectsOtherKinds) {
  const Dataset train = heteroscedastic(50, 1, 3);
  const auto model = fit(make_learner_spec("l", LearnerKind::kLinearPinball), train, QuantileLevelGrid({0.5}));
  EXPECT_THROW(split_frequency_importance(*model), std::invalid_argument);
  EXPECT_THROW(total_gain_importance(*model), std::invalid_argument);
  EXPECT_TRUE(model_importance(*model, ImportanceSetting::kRawFeatures).rows.empty());
}

TEST(TotalGain, TwoSplitHandModel) {
  // Left block (x1 = 0) holds y = 1 (x2 = 0) and y = 3 (x2 = 1); the right
  // block (x1 = 1) is constant at 10. At tau = 0.5 the start value is the
  // median 3, so residuals are -2, 0 and 7. Exact losses: root 0.5 * 45,
  // left 0.5 * 10, every other node 0. Gains: x1 17.5, x2 5.
  std::vector<double> values, y;
  for (int i = 0; i < 5; ++i) {
    values.insert(values.end(), {0, 0});
    y.push_back(1);
  }
  for (int i = 0; i < 5; ++i) {
    values.insert(values.end(), {0, 1});
    y.push_back(3);
  }
  for (int i = 0; i < 5; ++i) {
    values.insert(values.end(), {1, 0});
    y.push_back(10);
  }
  const FeatureMatrix x(15, 2, values);
  const auto spec = make_learner_spec("b", LearnerKind::kGradientBoostPinball,
                                      {{"rounds", 1},
                                       {"max_depth", 2},
                                       {"learning_rate", 1},
                                       {"min_leaf", 1},
                                       {"smoothing", 1e-10}});
  const auto model = fit(spec, x, y, QuantileLevelGrid({0.5}));
  const auto gain = total_gain_importance(*model);
  ASSERT_EQ(gain.size(), 1u);
  EXPECT_NEAR(gain[0][0], 17.5, 1e-6);
  EXPECT_NEAR(gain[0][1], 5.0, 1e-6);
  const auto& tree = dynamic_cast<const GradientBoostModel&>(*model).ensembles()[0].trees.at(0);
  int splits = 0;
  for (const auto& n : tree.tree.nodes) splits += n.is_leaf() ? 0 : 1;
  EXPECT_EQ(splits, 2);
}

TEST(TotalGain, StumpPutsAllGainOnItsFeature) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  FeatureMatrix x(200, 3);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t f = 0; f < 3; ++f) x(i, f) = u(rng);
    y[i] = x(i, 1) > 0.5 ? 5 : 1;
  }
  const auto spec = make_learner_spec("b", LearnerKind::kGradientBoostPinball,
                                      {{"rounds", 1}, {"max_depth", 1}, {"learning_rate", 1}});
  const auto gain = total_gain_importance(*fit(spec, x, y, QuantileLevelGrid({0.3, 0.7})));
  for (const auto& level : gain) {
    EXPECT_EQ(level[0], 0.0);
    EXPECT_GT(level[1], 0.0);
    EXPECT_EQ(level[2], 0.0);
  }
}

TEST(TotalGain, NoSplitsGivesZeros) {
  const Dataset base = heteroscedastic(100, 2, 5);
  const std::vector<double> y(base.size(), 2.0);
  const auto model = fit(make_learner_spec("b", LearnerKind::kGradientBoostPinball, {{"rounds", 10}}),
                         base.features(), y, QuantileLevelGrid::ci_default());
  for (const auto& level : total_gain_importance(*model)) EXPECT_EQ(level, (std::vector<double>{0, 0}));
}

TEST(TotalGain, ConservationAndNonNegativity) {
  const Dataset train = heteroscedastic(1000, 3, 6);
  const auto levels = QuantileLevelGrid::ci_default();
  const auto model = fit(make_learner_spec("b", LearnerKind::kGradientBoostPinball,
                                           {{"rounds", 50}, {"learning_rate", 0.1}}),
                         train, levels);
  const auto& boost = dynamic_cast<const GradientBoostModel&>(*model);
  double total_from_trees = 0.0;
  for (const auto& level : boost.ensembles()) {
    for (const auto& t : level.trees) {
      double gains = 0.0, leaves = 0.0;
      for (std::size_t n = 0; n < t.tree.nodes.size(); ++n) {
        EXPECT_GE(t.gain[n], 0.0);
        if (t.tree.nodes[n].is_leaf()) leaves += t.loss[n];
        else gains += t.gain[n];
      }
      EXPECT_NEAR(gains, t.loss[0] - leaves, 1e-9);
      total_from_trees += gains;
    }
  }
  double total_stat = 0.0;
  for (const auto& level : total_gain_importance(boost)) {
    for (double v : level) total_stat += v;
  }
  EXPECT_NEAR(total_stat, total_from_trees, 1e-9 * (1 + total_from_trees));

  std::vector<BoostLevel> reversed = boost.ensembles();
  for (auto& level : reversed) std::reverse(level.trees.begin(), level.trees.end());
  const GradientBoostModel shuffled(boost.spec(), boost.levels(), boost.feature_names(), reversed);
  const auto a = total_gain_importance(boost);
  const auto b = total_gain_importance(shuffled);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t f = 0; f < a[j].size(); ++f) EXPECT_NEAR(a[j][f], b[j][f], 1e-9 * (1 + a[j][f]));
  }
}

TEST(Ranks, Examples) {
  const QuantileLevelGrid levels({0.5});
  auto ranks = [&](std::vector<double> stats) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < stats.size(); ++i) names.push_back("p" + std::to_string(i));
    std::vector<int> out;
    for (const auto& r : rank_predictors(ImportanceSetting::kRawFeatures, ImportanceStatistic::kTotalGain,
                                         levels, names, {stats})
                             .rows) {
      out.push_back(r.rank);
    }
    return out;
  };
  EXPECT_EQ(ranks({0.7, 0.3}), (std::vector<int>{1, 2}));
  EXPECT_EQ(ranks({0.2, 0.2, 0.2}), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(ranks({0.1, 0.4, 0.0, 0.3, 0.2}), (std::vector<int>{4, 1, 5, 2, 3}));
  EXPECT_THROW(ranks({std::nan("")}), std::invalid_argument);
}

TEST(Report, StackedSettingAndCsv) {
  testing::TempDir dir;
  const Dataset train = heteroscedastic(400, 2, 7);
  const auto levels = QuantileLevelGrid::ci_default();
  const EnsembleSpec spec{
      "stack_forest",
      {make_learner_spec("linear", LearnerKind::kLinearPinball, {}, 1),
       make_learner_spec("forest", LearnerKind::kQuantileForest, {{"trees", 20}}, 2)},
      CombinerSpec::learner_based(
          "stack_forest", make_learner_spec("comb", LearnerKind::kQuantileForest, {{"trees", 20}})),
      3};
  const auto stack = fit_stack(spec, train, levels);
  auto report = combiner_importance(stack);
  ASSERT_EQ(report.rows.size(), levels.size() * 2);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.setting, ImportanceSetting::kStackedPredictions);
    EXPECT_EQ(r.statistic, ImportanceStatistic::kSplitFrequency);
    EXPECT_TRUE(r.predictor == "linear" || r.predictor == "forest");
    EXPECT_GE(r.value, 0.0);
  }
  append(report, model_importance(*stack.full_base_models[1], ImportanceSetting::kRawFeatures));
  ASSERT_EQ(report.rows.size(), levels.size() * 4);
  const auto path = dir / "importance.csv";
  write_importance_csv(report, path);
  const std::string text = testing::read_text(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "setting,statistic,level,predictor,value,rank");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(report.rows.size() + 1));
  EXPECT_NE(text.find("stacked_predictions,split_frequency,0.1,linear,"), std::string::npos);
  EXPECT_NE(text.find("raw_features,split_frequency,0.9,x2,"), std::string::npos);
}

}  // namespace
}  // namespace qstack
