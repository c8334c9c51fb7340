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

#ifndef QSTACK_REPORT_HPP_
#define QSTACK_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "qstack/scoring.hpp"

namespace qstack {

inline constexpr const char* kVersion = "1.0.0";

struct RunMetadata {
  std::string version = kVersion;
  std::string config_hash;
  std::uint64_t split_seed = 0;
  std::uint64_t ensemble_seed = 0;
  std::uint64_t learner_seed = 0;
  std::uint64_t data_seed = 0;
  bool operator==(const RunMetadata&) const = default;
};

struct ScoreReport {
  RunMetadata metadata;
  ScoreTable table;
  // Scores of the true conditional quantiles, when known.
  std::vector<ReferenceScore> oracle;
};

// '#'-prefixed metadata lines, then
// algorithm,level,mean_score,skill_vs_benchmark,coverage,rank.
// Throws std::invalid_argument for a table without rows before touching
// the file.
void write_scores_csv(const ScoreReport& report, const std::filesystem::path& path);
void write_scores_csv(const ScoreReport& report, std::ostream& out);
void write_scores_json(const ScoreReport& report, const std::filesystem::path& path);
ScoreReport read_scores_json(const std::filesystem::path& path);

}  // namespace qstack

#endif  // QSTACK_REPORT_HPP_
