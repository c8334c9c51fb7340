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

#include "qstack/learners.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "qstack/gradient_boost.hpp"
#include "qstack/linear_pinball.hpp"
#include "qstack/neural_pinball.hpp"
#include "qstack/quantile_forest.hpp"

namespace qstack {
namespace {

constexpr std::string_view kKindNames[] = {"linear_pinball", "quantile_forest",
                                           "gradient_boost_pinball", "neural_pinball"};

int as_int(const std::string& key, double v) {
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw std::invalid_argument("hyperparameter " + key + " must be an integer");
  }
  return static_cast<int>(v);
}

template <typename Params>
void apply(Params& p, const std::string& key, double v);

template <>
void apply(LinearParams& p, const std::string& key, double v) {
  if (key == "smoothing") p.smoothing = v;
  else if (key == "max_iterations") p.max_iterations = as_int(key, v);
  else if (key == "tolerance") p.tolerance = v;
  else throw std::invalid_argument("unknown linear_pinball hyperparameter: " + key);
}

template <>
void apply(ForestParams& p, const std::string& key, double v) {
  if (key == "trees") p.trees = as_int(key, v);
  else if (key == "min_leaf") p.min_leaf = as_int(key, v);
  else if (key == "mtry") p.mtry = as_int(key, v);
  else if (key == "max_depth") p.max_depth = as_int(key, v);
  else if (key == "bootstrap") p.bootstrap = as_int(key, v) != 0;
  else if (key == "honest") p.honest = as_int(key, v) != 0;
  else throw std::invalid_argument("unknown quantile_forest hyperparameter: " + key);
}

template <>
void apply(BoostParams& p, const std::string& key, double v) {
  if (key == "rounds") p.rounds = as_int(key, v);
  else if (key == "max_depth") p.max_depth = as_int(key, v);
  else if (key == "learning_rate") p.learning_rate = v;
  else if (key == "min_leaf") p.min_leaf = as_int(key, v);
  else if (key == "max_bins") p.max_bins = as_int(key, v);
  else if (key == "smoothing") p.smoothing = v;
  else if (key == "subsample") p.subsample = v;
  else throw std::invalid_argument("unknown gradient_boost_pinball hyperparameter: " + key);
}

template <>
void apply(NeuralParams& p, const std::string& key, double v) {
  if (key == "hidden") p.hidden = as_int(key, v);
  else if (key == "epochs") p.epochs = as_int(key, v);
  else if (key == "learning_rate") p.learning_rate = v;
  else if (key == "smoothing") p.smoothing = v;
  else if (key == "smoothing_final") p.smoothing_final = v;
  else throw std::invalid_argument("unknown neural_pinball hyperparameter: " + key);
}

void require(bool ok, const LearnerSpec& spec, const std::string& what) {
  if (!ok) throw std::invalid_argument("learner '" + spec.name + "': " + what);
}

}  // namespace

std::string_view kind_name(LearnerKind kind) { return kKindNames[static_cast<int>(kind)]; }

LearnerKind parse_kind(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kKindNames[i] == name) return static_cast<LearnerKind>(i);
  }
  throw std::invalid_argument("unknown learner kind: " + std::string(name));
}

LearnerSpec make_learner_spec(std::string name, LearnerKind kind, const Hyperparameters& overrides,
                              std::uint64_t seed) {
  LearnerSpec spec;
  spec.name = std::move(name);
  spec.seed = seed;
  switch (kind) {
    case LearnerKind::kLinearPinball: spec.params = LinearParams{}; break;
    case LearnerKind::kQuantileForest: spec.params = ForestParams{}; break;
    case LearnerKind::kGradientBoostPinball: spec.params = BoostParams{}; break;
    case LearnerKind::kNeuralPinball: spec.params = NeuralParams{}; break;
  }
  for (const auto& [key, value] : overrides) {
    std::visit([&](auto& p) { apply(p, key, value); }, spec.params);
  }
  validate(spec);
  return spec;
}

Hyperparameters hyperparameters(const LearnerSpec& spec) {
  Hyperparameters h;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearParams>) {
          h = {{"smoothing", p.smoothing},
               {"max_iterations", p.max_iterations},
               {"tolerance", p.tolerance}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          h = {{"trees", p.trees},
               {"min_leaf", p.min_leaf},
               {"mtry", p.mtry},
               {"max_depth", p.max_depth},
               {"bootstrap", p.bootstrap ? 1.0 : 0.0},
               {"honest", p.honest ? 1.0 : 0.0}};
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          h = {{"rounds", p.rounds},         {"max_depth", p.max_depth},
               {"learning_rate", p.learning_rate}, {"min_leaf", p.min_leaf},
               {"max_bins", p.max_bins},     {"smoothing", p.smoothing},
               {"subsample", p.subsample}};
        } else {
          h = {{"hidden", p.hidden},
               {"epochs", p.epochs},
               {"learning_rate", p.learning_rate},
               {"smoothing", p.smoothing},
               {"smoothing_final", p.smoothing_final}};
        }
      },
      spec.params);
  return h;
}

void validate(const LearnerSpec& spec) {
  require(!spec.name.empty(), spec, "name is empty");
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearParams>) {
          require(p.smoothing > 0.0, spec, "smoothing must be positive");
          require(p.max_iterations >= 1, spec, "max_iterations must be >= 1");
          require(p.tolerance >= 0.0, spec, "tolerance must be >= 0");
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          require(p.trees >= 1, spec, "trees must be >= 1");
          require(p.min_leaf >= 1, spec, "min_leaf must be >= 1");
          require(p.mtry >= 0, spec, "mtry must be >= 0");
          require(p.max_depth >= 0, spec, "max_depth must be >= 0");
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          require(p.rounds >= 1, spec, "rounds must be >= 1");
          require(p.max_depth >= 1, spec, "max_depth must be >= 1");
          require(p.learning_rate > 0.0 && p.learning_rate <= 1.0, spec,
                  "learning_rate must be in (0, 1]");
          require(p.min_leaf >= 1, spec, "min_leaf must be >= 1");
          require(p.max_bins >= 2 && p.max_bins <= 65535, spec, "max_bins must be in [2, 65535]");
          require(p.smoothing > 0.0, spec, "smoothing must be positive");
          require(p.subsample > 0.0 && p.subsample <= 1.0, spec, "subsample must be in (0, 1]");
        } else {
          require(p.hidden >= 1, spec, "hidden must be >= 1");
          require(p.epochs >= 1, spec, "epochs must be >= 1");
          require(p.learning_rate > 0.0 && p.learning_rate <= 1.0, spec,
                  "learning_rate must be in (0, 1]");
          require(p.smoothing > 0.0 && p.smoothing_final > 0.0, spec,
                  "smoothing must be positive");
        }
      },
      spec.params);
}

QuantileModel::QuantileModel(LearnerSpec spec, QuantileLevelGrid levels,
                             std::vector<std::string> feature_names)
    : spec_(std::move(spec)), levels_(std::move(levels)), feature_names_(std::move(feature_names)) {}

PredictionMatrix QuantileModel::predict(const FeatureMatrix& x) const {
  if (x.cols() != feature_count()) {
    throw std::invalid_argument("model '" + spec_.name + "' expects " +
                                std::to_string(feature_count()) + " features, got " +
                                std::to_string(x.cols()));
  }
  PredictionMatrix out(levels_, x.rows());
  predict_rows(x, out);
  return out;
}

PredictionMatrix QuantileModel::predict(const Dataset& data) const {
  if (data.feature_count() != feature_count()) {
    throw std::invalid_argument("model '" + spec_.name + "' expects " +
                                std::to_string(feature_count()) + " features, got " +
                                std::to_string(data.feature_count()));
  }
  return predict(data.features());
}

TrainedModel fit(const LearnerSpec& spec, const Dataset& train, const QuantileLevelGrid& levels) {
  return fit(spec, train.features(), train.targets(), levels, train.feature_names());
}

TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
                 const QuantileLevelGrid& levels, std::vector<std::string> feature_names) {
  validate(spec);
  if (levels.empty()) throw std::invalid_argument("fit needs at least one quantile level");
  if (x.rows() == 0) throw std::invalid_argument("learner '" + spec.name + "': empty training set");
  if (x.cols() == 0) throw std::invalid_argument("learner '" + spec.name + "': no predictors");
  if (x.rows() != y.size()) throw std::invalid_argument("features and targets differ in length");
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < x.cols(); ++j) feature_names.push_back("x" + std::to_string(j + 1));
  }
  if (feature_names.size() != x.cols()) throw std::invalid_argument("feature name count mismatch");
  switch (spec.kind()) {
    case LearnerKind::kLinearPinball:
      return fit_linear_pinball(spec, x, y, levels, std::move(feature_names));
    case LearnerKind::kQuantileForest:
      return fit_quantile_forest(spec, x, y, levels, std::move(feature_names));
    case LearnerKind::kGradientBoostPinball:
      return fit_gradient_boost(spec, x, y, levels, std::move(feature_names));
    case LearnerKind::kNeuralPinball:
      return fit_neural_pinball(spec, x, y, levels, std::move(feature_names));
  }
  throw std::logic_error("unreachable learner kind");
}

PredictionMatrix predict(const QuantileModel& model, const Dataset& data) {
  return model.predict(data);
}

void save_model(const QuantileModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model artifact: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing model artifact: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model artifact: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace qstack
