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

#include "qstack/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qstack/parallel.hpp"
#include "qstack/random.hpp"
#include "qstack/scoring.hpp"

namespace qstack {
namespace {

using nlohmann::json;

constexpr std::string_view kRuleNames[] = {"learner", "mean", "median", "best"};

void check_inputs(std::span<const PredictionMatrix> preds, const QuantileLevelGrid& levels) {
  if (preds.empty()) throw std::invalid_argument("combiner needs at least one base prediction");
  for (const auto& p : preds) {
    if (p.levels() != levels) throw std::invalid_argument("base predictions use a different level grid");
    if (p.rows() != preds.front().rows()) throw std::invalid_argument("base predictions differ in length");
  }
}

FeatureMatrix level_inputs(std::span<const PredictionMatrix> preds, std::size_t level) {
  FeatureMatrix x(preds.front().rows(), preds.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t b = 0; b < preds.size(); ++b) x(i, b) = preds[b](i, level);
  return x;
}

std::string safe_file_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string_view rule_name(CombinerRule rule) { return kRuleNames[static_cast<int>(rule)]; }

CombinerRule parse_rule(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kRuleNames[i] == name) return static_cast<CombinerRule>(i);
  }
  throw std::invalid_argument("unknown combiner rule: " + std::string(name));
}

CombinerSpec CombinerSpec::mean(std::string name) { return {std::move(name), CombinerRule::kMean, {}}; }
CombinerSpec CombinerSpec::median(std::string name) {
  return {std::move(name), CombinerRule::kMedian, {}};
}
CombinerSpec CombinerSpec::best(std::string name) { return {std::move(name), CombinerRule::kBest, {}}; }
CombinerSpec CombinerSpec::learner_based(std::string name, LearnerSpec learner) {
  return {std::move(name), CombinerRule::kLearner, std::move(learner)};
}

void validate(const EnsembleSpec& spec) {
  if (spec.base_specs.empty()) throw std::invalid_argument("ensemble '" + spec.name + "' has no base learners");
  std::set<std::string> names;
  for (const auto& b : spec.base_specs) {
    validate(b);
    if (!names.insert(b.name).second) {
      throw std::invalid_argument("ensemble '" + spec.name + "': duplicate base learner name '" + b.name + "'");
    }
  }
  const bool has_learner = spec.combiner.learner.has_value();
  if (has_learner != (spec.combiner.rule == CombinerRule::kLearner)) {
    throw std::invalid_argument("combiner '" + spec.combiner.name + "' is inconsistent");
  }
  if (has_learner) validate(*spec.combiner.learner);
}

double combine_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of no predictions");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double combine_median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of no predictions");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::size_t select_best(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("no scores to select from");
  std::size_t best = 0;
  for (std::size_t b = 1; b < scores.size(); ++b) {
    if (scores[b] < scores[best]) best = b;
  }
  return best;
}

std::vector<std::size_t> select_best(const std::vector<std::vector<double>>& scores) {
  std::vector<std::size_t> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(select_best(std::span<const double>(s)));
  return out;
}

FittedCombiner fit_combiner(const CombinerSpec& spec, std::span<const PredictionMatrix> base_predictions,
                            std::span<const double> targets, const QuantileLevelGrid& levels,
                            std::uint64_t seed) {
  check_inputs(base_predictions, levels);
  if (base_predictions.front().rows() != targets.size()) {
    throw std::invalid_argument("combiner targets differ in length from base predictions");
  }
  FittedCombiner out;
  out.spec = spec;
  out.inputs = base_predictions.size();
  switch (spec.rule) {
    case CombinerRule::kMean:
    case CombinerRule::kMedian:
      break;
    case CombinerRule::kBest: {
      std::vector<std::vector<double>> scores(levels.size());
      for (std::size_t j = 0; j < levels.size(); ++j) {
        for (const auto& p : base_predictions) scores[j].push_back(mean_pinball(p.column(j), targets, levels[j]));
      }
      out.best_index = select_best(scores);
      break;
    }
    case CombinerRule::kLearner: {
      if (!spec.learner) throw std::invalid_argument("combiner '" + spec.name + "' has no learner");
      std::vector<std::string> names;
      for (std::size_t b = 0; b < base_predictions.size(); ++b) names.push_back("base" + std::to_string(b + 1));
      out.level_models.resize(levels.size());
      parallel_for(levels.size(), [&](std::size_t j) {
        LearnerSpec learner = *spec.learner;
        learner.seed = derive_seed(seed, stream::kCombiner, j);
        out.level_models[j] = fit(learner, level_inputs(base_predictions, j), targets,
                                  QuantileLevelGrid({levels[j]}), names);
      });
      break;
    }
  }
  return out;
}

PredictionMatrix combine(const FittedCombiner& combiner,
                         std::span<const PredictionMatrix> base_predictions) {
  if (base_predictions.size() != combiner.inputs) {
    throw std::invalid_argument("combiner '" + combiner.spec.name + "' expects " +
                                std::to_string(combiner.inputs) + " base predictions, got " +
                                std::to_string(base_predictions.size()));
  }
  const QuantileLevelGrid& levels = base_predictions.front().levels();
  check_inputs(base_predictions, levels);
  const std::size_t n = base_predictions.front().rows();
  PredictionMatrix out(levels, n);
  std::vector<double> values(base_predictions.size());
  switch (combiner.spec.rule) {
    case CombinerRule::kMean:
    case CombinerRule::kMedian:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < levels.size(); ++j) {
          for (std::size_t b = 0; b < values.size(); ++b) values[b] = base_predictions[b](i, j);
          out(i, j) = combiner.spec.rule == CombinerRule::kMean ? combine_mean(values) : combine_median(values);
        }
      }
      break;
    case CombinerRule::kBest:
      if (combiner.best_index.size() != levels.size()) throw std::invalid_argument("best combiner level mismatch");
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const PredictionMatrix& chosen = base_predictions[combiner.best_index[j]];
        for (std::size_t i = 0; i < n; ++i) out(i, j) = chosen(i, j);
      }
      break;
    case CombinerRule::kLearner:
      if (combiner.level_models.size() != levels.size()) {
        throw std::invalid_argument("learner combiner level mismatch");
      }
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const PredictionMatrix level = combiner.level_models[j]->predict(level_inputs(base_predictions, j));
        for (std::size_t i = 0; i < n; ++i) out(i, j) = level(i, 0);
      }
      break;
  }
  return out;
}

StackedModel fit_stack(const EnsembleSpec& spec, const Dataset& train, const QuantileLevelGrid& levels) {
  validate(spec);
  const std::size_t k = spec.base_specs.size();
  if (train.size() < 2 * k) {
    throw std::invalid_argument("ensemble '" + spec.name + "': training set of " +
                                std::to_string(train.size()) + " samples is too small for " +
                                std::to_string(k) + " base learners");
  }
  const SplitPlan halves = split_two_way(train, derive_seed(spec.seed, stream::kStackSplit));
  const Dataset set1 = train.subset(halves.parts[0]);
  const Dataset set2 = train.subset(halves.parts[1]);

  auto fit_bases = [&](const Dataset& data) {
    std::vector<TrainedModel> models(k);
    parallel_for(k, [&](std::size_t b) {
      try {
        models[b] = fit(spec.base_specs[b], data, levels);
      } catch (const std::exception& e) {
        throw std::runtime_error("base learner '" + spec.base_specs[b].name + "': " + e.what());
      }
    });
    return models;
  };

  const std::vector<TrainedModel> set1_models = fit_bases(set1);
  std::vector<PredictionMatrix> set2_predictions(k);
  for (std::size_t b = 0; b < k; ++b) set2_predictions[b] = set1_models[b]->predict(set2);

  StackedModel model;
  model.name = spec.name;
  model.levels = levels;
  model.feature_names = train.feature_names();
  for (const auto& b : spec.base_specs) model.base_names.push_back(b.name);
  model.combiner = fit_combiner(spec.combiner, set2_predictions, set2.targets(), levels, spec.seed);
  model.full_base_models = fit_bases(train);
  return model;
}

PredictionMatrix predict_stack(const StackedModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.feature_names.size()) {
    throw std::invalid_argument("stack '" + model.name + "' expects " +
                                std::to_string(model.feature_names.size()) + " features, got " +
                                std::to_string(x.cols()));
  }
  std::vector<PredictionMatrix> base(model.full_base_models.size());
  for (std::size_t b = 0; b < base.size(); ++b) base[b] = model.full_base_models[b]->predict(x);
  return combine(model.combiner, base);
}

PredictionMatrix predict_stack(const StackedModel& model, const Dataset& data) {
  return predict_stack(model, data.features());
}

std::filesystem::path save_stack(const StackedModel& model, const std::filesystem::path& dir,
                                 bool write_bases) {
  std::filesystem::create_directories(dir);
  const std::string stem = safe_file_name(model.name);
  json bases = json::array();
  for (std::size_t b = 0; b < model.full_base_models.size(); ++b) {
    const std::string file = safe_file_name(model.base_names[b]) + ".qsm";
    if (write_bases) save_model(*model.full_base_models[b], dir / file);
    bases.push_back({{"name", model.base_names[b]}, {"artifact", file}});
  }
  json combiner_models = json::array();
  for (std::size_t j = 0; j < model.combiner.level_models.size(); ++j) {
    const std::string file = stem + ".combiner" + std::to_string(j + 1) + ".qsm";
    save_model(*model.combiner.level_models[j], dir / file);
    combiner_models.push_back(file);
  }
  const json manifest = {
      {"format", "qstack-stack"},
      {"version", 1},
      {"name", model.name},
      {"levels", std::vector<double>(model.levels.values().begin(), model.levels.values().end())},
      {"feature_names", model.feature_names},
      {"bases", bases},
      {"combiner",
       {{"name", model.combiner.spec.name},
        {"rule", std::string(rule_name(model.combiner.spec.rule))},
        {"inputs", model.combiner.inputs},
        {"best_index", model.combiner.best_index},
        {"level_models", combiner_models}}},
  };
  const auto path = dir / (stem + ".stack.json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stack manifest: " + path.string());
  out << manifest.dump(2) << '\n';
  return path;
}

StackedModel load_stack(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read stack manifest: " + manifest_path.string());
  const auto dir = manifest_path.parent_path();
  try {
    const json m = json::parse(in);
    if (m.value("format", "") != "qstack-stack" || m.value("version", 0) != 1) {
      throw std::runtime_error("not a qstack stack manifest: " + manifest_path.string());
    }
    StackedModel model;
    model.name = m.at("name").get<std::string>();
    model.levels = QuantileLevelGrid(m.at("levels").get<std::vector<double>>());
    model.feature_names = m.at("feature_names").get<std::vector<std::string>>();
    for (const json& b : m.at("bases")) {
      model.base_names.push_back(b.at("name").get<std::string>());
      model.full_base_models.push_back(load_model(dir / b.at("artifact").get<std::string>()));
    }
    const json& c = m.at("combiner");
    model.combiner.spec.name = c.at("name").get<std::string>();
    model.combiner.spec.rule = parse_rule(c.at("rule").get<std::string>());
    model.combiner.inputs = c.at("inputs").get<std::size_t>();
    model.combiner.best_index = c.at("best_index").get<std::vector<std::size_t>>();
    for (const json& file : c.at("level_models")) {
      model.combiner.level_models.push_back(load_model(dir / file.get<std::string>()));
    }
    if (model.combiner.spec.rule == CombinerRule::kLearner) {
      if (model.combiner.level_models.empty()) throw std::runtime_error("learner combiner without models");
      model.combiner.spec.learner = model.combiner.level_models.front()->spec();
    }
    if (model.combiner.inputs != model.full_base_models.size()) {
      throw std::runtime_error("combiner input count differs from base count");
    }
    for (std::size_t idx : model.combiner.best_index) {
      if (idx >= model.full_base_models.size()) throw std::runtime_error("best index out of range");
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed stack manifest " + manifest_path.string() + ": " + e.what());
  }
}

}  // namespace qstack
