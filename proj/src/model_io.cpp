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

#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "qstack/gradient_boost.hpp"
#include "qstack/learners.hpp"
#include "qstack/linear_pinball.hpp"
#include "qstack/neural_pinball.hpp"
#include "qstack/quantile_forest.hpp"

namespace qstack {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "qstack-model";
constexpr int kVersion = 1;

json tree_to_json(const DecisionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), depth = json::array();
  for (const TreeNode& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    depth.push_back(n.depth);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"depth", depth}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  const auto& feature = j.at("feature");
  const std::size_t count = feature.size();
  tree.nodes.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    TreeNode& n = tree.nodes[k];
    n.feature = feature[k].get<std::int32_t>();
    n.threshold = j.at("threshold").at(k).get<double>();
    n.left = j.at("left").at(k).get<std::int32_t>();
    n.right = j.at("right").at(k).get<std::int32_t>();
    n.depth = j.at("depth").at(k).get<std::int32_t>();
    if (!n.is_leaf()) {
      const auto bad = [&](std::int32_t c) { return c <= static_cast<std::int32_t>(k) || c >= static_cast<std::int32_t>(count); };
      if (bad(n.left) || bad(n.right)) throw std::runtime_error("corrupt tree in model artifact");
    }
  }
  if (count == 0) throw std::runtime_error("empty tree in model artifact");
  return tree;
}

json standardizer_to_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from_json(const json& j, std::size_t p) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != p || s.scale.size() != p) {
    throw std::runtime_error("standardizer size mismatch in model artifact");
  }
  return s;
}

json payload(const QuantileModel& model) {
  switch (model.kind()) {
    case LearnerKind::kLinearPinball: {
      const auto& m = dynamic_cast<const LinearPinballModel&>(model);
      return {{"standardizer", standardizer_to_json(m.standardizer())},
              {"coefficients", m.coefficients()}};
    }
    case LearnerKind::kQuantileForest: {
      const auto& m = dynamic_cast<const QuantileForestModel&>(model);
      json trees = json::array();
      for (const ForestTree& t : m.trees()) {
        trees.push_back({{"tree", tree_to_json(t.tree)},
                         {"member_begin", t.member_begin},
                         {"member_end", t.member_end},
                         {"members", t.members}});
      }
      return {{"train_targets", m.train_targets()}, {"trees", trees}};
    }
    case LearnerKind::kGradientBoostPinball: {
      const auto& m = dynamic_cast<const GradientBoostModel&>(model);
      json levels = json::array();
      for (const BoostLevel& level : m.ensembles()) {
        json trees = json::array();
        for (const BoostTree& t : level.trees) {
          trees.push_back({{"tree", tree_to_json(t.tree)},
                           {"value", t.value},
                           {"loss", t.loss},
                           {"gain", t.gain}});
        }
        levels.push_back({{"init", level.init}, {"trees", trees}, {"loss_trace", level.loss_trace}});
      }
      return {{"levels", levels}};
    }
    case LearnerKind::kNeuralPinball: {
      const auto& m = dynamic_cast<const NeuralPinballModel&>(model);
      json levels = json::array();
      for (const NeuralWeights& w : m.weights()) {
        levels.push_back({{"w1", w.w1}, {"b1", w.b1}, {"w2", w.w2}, {"b2", w.b2}});
      }
      return {{"standardizer", standardizer_to_json(m.standardizer())},
              {"y_center", m.y_center()},
              {"y_scale", m.y_scale()},
              {"levels", levels}};
    }
  }
  throw std::logic_error("unreachable learner kind");
}

void check_levels(const json& arr, std::size_t levels) {
  if (arr.size() != levels) throw std::runtime_error("level count mismatch in model artifact");
}

}  // namespace

std::vector<std::uint8_t> encode_model(const QuantileModel& model) {
  json hyper = json::object();
  for (const auto& [key, value] : hyperparameters(model.spec())) hyper[key] = value;
  const json doc = {
      {"format", kFormat},
      {"version", kVersion},
      {"name", model.spec().name},
      {"kind", std::string(kind_name(model.kind()))},
      {"seed", model.spec().seed},
      {"hyperparameters", hyper},
      {"levels", std::vector<double>(model.levels().values().begin(), model.levels().values().end())},
      {"feature_names", model.feature_names()},
      {"payload", payload(model)},
  };
  return json::to_cbor(doc);
}

TrainedModel decode_model(std::span<const std::uint8_t> bytes) {
  json doc;
  try {
    doc = json::from_cbor(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("unreadable model artifact: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormat) {
      throw std::runtime_error("not a qstack model artifact");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw std::runtime_error("unsupported model artifact version " +
                               std::to_string(doc.at("version").get<int>()));
    }
    Hyperparameters hyper;
    for (const auto& [key, value] : doc.at("hyperparameters").items()) hyper[key] = value.get<double>();
    const LearnerKind kind = parse_kind(doc.at("kind").get<std::string>());
    LearnerSpec spec = make_learner_spec(doc.at("name").get<std::string>(), kind, hyper,
                                         doc.at("seed").get<std::uint64_t>());
    QuantileLevelGrid levels(doc.at("levels").get<std::vector<double>>());
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const std::size_t p = names.size();
    const json& body = doc.at("payload");

    switch (kind) {
      case LearnerKind::kLinearPinball: {
        auto coef = body.at("coefficients").get<std::vector<std::vector<double>>>();
        check_levels(body.at("coefficients"), levels.size());
        for (const auto& c : coef) {
          if (c.size() != p + 1) throw std::runtime_error("coefficient size mismatch in model artifact");
        }
        return std::make_shared<LinearPinballModel>(std::move(spec), std::move(levels),
                                                    std::move(names),
                                                    standardizer_from_json(body.at("standardizer"), p),
                                                    std::move(coef));
      }
      case LearnerKind::kQuantileForest: {
        auto targets = body.at("train_targets").get<std::vector<double>>();
        std::vector<ForestTree> trees;
        for (const json& t : body.at("trees")) {
          ForestTree tree;
          tree.tree = tree_from_json(t.at("tree"));
          tree.member_begin = t.at("member_begin").get<std::vector<std::uint32_t>>();
          tree.member_end = t.at("member_end").get<std::vector<std::uint32_t>>();
          tree.members = t.at("members").get<std::vector<std::uint32_t>>();
          const std::size_t nodes = tree.tree.nodes.size();
          if (tree.member_begin.size() != nodes || tree.member_end.size() != nodes) {
            throw std::runtime_error("corrupt forest leaf table in model artifact");
          }
          for (std::size_t k = 0; k < nodes; ++k) {
            if (tree.member_begin[k] > tree.member_end[k] || tree.member_end[k] > tree.members.size()) {
              throw std::runtime_error("corrupt forest leaf table in model artifact");
            }
          }
          for (std::uint32_t m : tree.members) {
            if (m >= targets.size()) throw std::runtime_error("corrupt forest member in model artifact");
          }
          trees.push_back(std::move(tree));
        }
        return std::make_shared<QuantileForestModel>(std::move(spec), std::move(levels),
                                                     std::move(names), std::move(targets),
                                                     std::move(trees));
      }
      case LearnerKind::kGradientBoostPinball: {
        check_levels(body.at("levels"), levels.size());
        std::vector<BoostLevel> ensembles;
        for (const json& l : body.at("levels")) {
          BoostLevel level;
          level.init = l.at("init").get<double>();
          level.loss_trace = l.at("loss_trace").get<std::vector<double>>();
          for (const json& t : l.at("trees")) {
            BoostTree tree;
            tree.tree = tree_from_json(t.at("tree"));
            tree.value = t.at("value").get<std::vector<double>>();
            tree.loss = t.at("loss").get<std::vector<double>>();
            tree.gain = t.at("gain").get<std::vector<double>>();
            const std::size_t nodes = tree.tree.nodes.size();
            if (tree.value.size() != nodes || tree.loss.size() != nodes || tree.gain.size() != nodes) {
              throw std::runtime_error("corrupt boosting tree in model artifact");
            }
            level.trees.push_back(std::move(tree));
          }
          ensembles.push_back(std::move(level));
        }
        return std::make_shared<GradientBoostModel>(std::move(spec), std::move(levels),
                                                    std::move(names), std::move(ensembles));
      }
      case LearnerKind::kNeuralPinball: {
        check_levels(body.at("levels"), levels.size());
        const auto hidden = static_cast<std::size_t>(std::get<NeuralParams>(spec.params).hidden);
        std::vector<NeuralWeights> weights;
        for (const json& l : body.at("levels")) {
          NeuralWeights w;
          w.w1 = l.at("w1").get<std::vector<double>>();
          w.b1 = l.at("b1").get<std::vector<double>>();
          w.w2 = l.at("w2").get<std::vector<double>>();
          w.b2 = l.at("b2").get<double>();
          if (w.w1.size() != hidden * p || w.b1.size() != hidden || w.w2.size() != hidden) {
            throw std::runtime_error("network size mismatch in model artifact");
          }
          weights.push_back(std::move(w));
        }
        return std::make_shared<NeuralPinballModel>(
            std::move(spec), std::move(levels), std::move(names),
            standardizer_from_json(body.at("standardizer"), p), body.at("y_center").get<double>(),
            body.at("y_scale").get<double>(), std::move(weights));
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed model artifact: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed model artifact: ") + e.what());
  }
  throw std::logic_error("unreachable learner kind");
}

}  // namespace qstack
