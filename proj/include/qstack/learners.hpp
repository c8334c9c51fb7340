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

#ifndef QSTACK_LEARNERS_HPP_
#define QSTACK_LEARNERS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qstack/dataset.hpp"
#include "qstack/levels.hpp"
#include "qstack/matrix.hpp"

namespace qstack {

enum class LearnerKind {
  kLinearPinball,
  kQuantileForest,
  kGradientBoostPinball,
  kNeuralPinball,
};

// "linear_pinball", "quantile_forest", "gradient_boost_pinball", "neural_pinball".
std::string_view kind_name(LearnerKind kind);
LearnerKind parse_kind(std::string_view name);

// Linear quantile regression by iteratively reweighted least squares.
struct LinearParams {
  double smoothing = 1e-6;  // residual floor, relative to the target spread
  int max_iterations = 100;
  double tolerance = 1e-12;
};

// Quantile regression forest with empirical leaf distributions.
struct ForestParams {
  int trees = 500;
  int min_leaf = 5;
  int mtry = 0;       // 0: ceil(p / 3)
  int max_depth = 0;  // 0: unlimited
  bool bootstrap = true;
  bool honest = true;  // split on one half, fill leaves from the other
};

// Gradient boosting of regression trees on the smoothed quantile loss.
struct BoostParams {
  int rounds = 500;
  int max_depth = 3;
  double learning_rate = 0.05;
  int min_leaf = 10;
  int max_bins = 255;
  double smoothing = 1e-3;  // relative to the target spread
  double subsample = 1.0;
};

// One-hidden-layer tanh network trained full batch with Adam.
struct NeuralParams {
  int hidden = 16;
  int epochs = 200;
  double learning_rate = 0.05;
  double smoothing = 1e-3;        // first epoch, standardized target units
  double smoothing_final = 1e-6;  // last epoch
};

using LearnerParams = std::variant<LinearParams, ForestParams, BoostParams, NeuralParams>;
using Hyperparameters = std::map<std::string, double>;

struct LearnerSpec {
  std::string name;
  LearnerParams params;
  std::uint64_t seed = 0;

  LearnerKind kind() const { return static_cast<LearnerKind>(params.index()); }
};

// Defaults for `kind` with the given overrides applied. Throws
// std::invalid_argument for unknown keys or invalid values.
LearnerSpec make_learner_spec(std::string name, LearnerKind kind,
                              const Hyperparameters& overrides = {}, std::uint64_t seed = 0);
Hyperparameters hyperparameters(const LearnerSpec& spec);
void validate(const LearnerSpec& spec);

// A fitted learner. Immutable; predict is reentrant.
class QuantileModel {
 public:
  QuantileModel(LearnerSpec spec, QuantileLevelGrid levels, std::vector<std::string> feature_names);
  virtual ~QuantileModel() = default;

  const LearnerSpec& spec() const { return spec_; }
  LearnerKind kind() const { return spec_.kind(); }
  const QuantileLevelGrid& levels() const { return levels_; }
  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  // Throws std::invalid_argument when the column count differs from the
  // training feature count.
  PredictionMatrix predict(const FeatureMatrix& x) const;
  PredictionMatrix predict(const Dataset& data) const;

 protected:
  virtual void predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const = 0;

 private:
  LearnerSpec spec_;
  QuantileLevelGrid levels_;
  std::vector<std::string> feature_names_;
};

using TrainedModel = std::shared_ptr<const QuantileModel>;

// Fits one model covering every level. Deterministic in (spec, data, levels).
TrainedModel fit(const LearnerSpec& spec, const Dataset& train, const QuantileLevelGrid& levels);
TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
                 const QuantileLevelGrid& levels, std::vector<std::string> feature_names = {});

PredictionMatrix predict(const QuantileModel& model, const Dataset& data);

// Versioned self-describing artifact (CBOR).
std::vector<std::uint8_t> encode_model(const QuantileModel& model);
TrainedModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const QuantileModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace qstack

#endif  // QSTACK_LEARNERS_HPP_
