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

#ifndef QSTACK_DATASET_HPP_
#define QSTACK_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qstack/matrix.hpp"

namespace qstack {

// One gauge observation and its predictor vector.
struct Sample {
  double target = 0.0;  // mm/month, >= 0
  std::vector<double> predictors;
  std::string station_id;
  std::int64_t time_index = 0;

  bool operator==(const Sample&) const = default;
};

// Immutable table of samples sharing one feature layout. Every sample keeps
// the id of the row it came from, so subsets can be traced back to the
// original table.
class Dataset {
 public:
  Dataset() = default;
  // Throws std::invalid_argument when a sample's predictor count differs
  // from feature_names, a predictor is not finite, or a target is negative
  // or not finite.
  Dataset(std::vector<std::string> feature_names, std::vector<Sample> samples);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const std::size_t> row_ids() const { return row_ids_; }

  // Samples at the given positions, in the given order; row ids carry over.
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<double> targets() const;
  FeatureMatrix features() const;
  // Same targets, identities and row ids with the predictors replaced.
  Dataset with_features(std::vector<std::string> feature_names,
                        const FeatureMatrix& features) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<std::string> feature_names_;
  std::vector<Sample> samples_;
  std::vector<std::size_t> row_ids_;
};

// Column mapping for load_csv.
struct CsvSchema {
  std::string target = "target";
  // Empty selects every column other than target, station and time.
  std::vector<std::string> features;
  // Station and time columns are optional in the file.
  std::string station = "station_id";
  std::string time = "time_index";
};

struct RowIssue {
  std::size_t line = 0;
  std::string reason;
};

struct LoadReport {
  // Rows discarded for a missing or unparseable target or a missing predictor.
  std::size_t dropped = 0;
  // Rows rejected as invalid (negative target, non-numeric predictor, ...).
  std::vector<RowIssue> rejected;
};

struct LoadResult {
  Dataset dataset;
  LoadReport report;
};

// Throws std::runtime_error for a missing file or a schema column absent
// from the header. Row-level problems are reported, not thrown.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes station_id, time_index, target and the features in order, using
// round-trip exact number formatting.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

// Random partition of row positions.
struct SplitPlan {
  std::vector<std::vector<std::size_t>> parts;
  std::uint64_t seed = 0;

  bool operator==(const SplitPlan&) const = default;
};

// Shuffles [0, n) with the seed and cuts it into `parts` contiguous blocks.
// Earlier blocks take the remainder; indices inside a block are sorted.
SplitPlan split_random(std::size_t n, std::size_t parts, std::uint64_t seed);
SplitPlan split_three_way(const Dataset& dataset, std::uint64_t seed);
SplitPlan split_two_way(const Dataset& dataset, std::uint64_t seed);

// Sorted union of several parts.
std::vector<std::size_t> merge_parts(const SplitPlan& plan,
                                     std::span<const std::size_t> which);

}  // namespace qstack

#endif  // QSTACK_DATASET_HPP_
