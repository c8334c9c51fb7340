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

#ifndef QSTACK_CONFIG_HPP_
#define QSTACK_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qstack/dataset.hpp"
#include "qstack/ensemble.hpp"
#include "qstack/learners.hpp"
#include "qstack/levels.hpp"
#include "qstack/synthetic.hpp"

namespace qstack {

struct DataSource {
  enum class Kind { kSynthetic, kCsv, kSpatial };
  Kind kind = Kind::kSynthetic;

  // kSynthetic: exactly one of tabular / spatial.
  std::optional<TabularParams> tabular;
  std::optional<SpatialParams> spatial;

  // kCsv
  std::filesystem::path csv;
  CsvSchema schema;

  // kSpatial: gauges plus one grid file per product, in predictor order.
  std::filesystem::path sites;
  std::vector<std::pair<std::string, std::filesystem::path>> products;

  // Optional true conditional quantiles for kCsv and kSpatial.
  std::optional<std::filesystem::path> truth;
};

struct BaseEntry {
  std::string name;
  LearnerKind kind = LearnerKind::kLinearPinball;
  Hyperparameters params;
};

struct CombinerEntry {
  std::string name;
  CombinerRule rule = CombinerRule::kMean;
  LearnerKind kind = LearnerKind::kLinearPinball;  // kLearner only
  Hyperparameters params;
};

struct Seeds {
  std::uint64_t split = 1;
  std::uint64_t ensemble = 2;
  std::uint64_t learners = 3;
  std::uint64_t data = 4;
};

struct ExperimentConfig {
  DataSource data;
  QuantileLevelGrid levels = QuantileLevelGrid::full_default();
  std::vector<BaseEntry> bases;
  std::vector<CombinerEntry> combiners;
  std::string benchmark = "linear";
  Seeds seeds;
  std::filesystem::path output = "qstack-out";
  std::size_t threads = 0;  // 0: all cores
  bool save_models = true;
};

// Tabular synthetic data, the four learner kinds as bases and every
// combiner: stack_linear, stack_forest, stack_boost, stack_neural, mean,
// median, best. Benchmark: linear.
ExperimentConfig default_config();

// YAML. Relative data paths resolve against the config file's directory.
// Throws std::runtime_error with the offending key on malformed input.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir = {});

// Throws std::invalid_argument when names collide, the benchmark is not
// evaluated, or a learner spec is invalid.
void validate(const ExperimentConfig& config);

// Names of every evaluated algorithm: bases, then combiners.
std::vector<std::string> algorithm_names(const ExperimentConfig& config);
std::vector<LearnerSpec> base_specs(const ExperimentConfig& config);
std::vector<CombinerSpec> combiner_specs(const ExperimentConfig& config);

// Settings that determine results, as sorted-key JSON. Output location and
// thread count are left out since they do not change any result.
std::string canonical_json(const ExperimentConfig& config);
// SHA-256 of canonical_json, lowercase hex.
std::string config_hash(const ExperimentConfig& config);

}  // namespace qstack

#endif  // QSTACK_CONFIG_HPP_
