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

#include "qstack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "qstack/csv.hpp"
#include "qstack/random.hpp"

namespace qstack {

Dataset::Dataset(std::vector<std::string> feature_names, std::vector<Sample> samples)
    : feature_names_(std::move(feature_names)), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.predictors.size() != feature_names_.size()) {
      throw std::invalid_argument("sample " + std::to_string(i) + " has " +
                                  std::to_string(s.predictors.size()) + " predictors, expected " +
                                  std::to_string(feature_names_.size()));
    }
    if (!std::isfinite(s.target) || s.target < 0.0) {
      throw std::invalid_argument("sample " + std::to_string(i) +
                                  " has a negative or non-finite target");
    }
    for (double v : s.predictors) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("sample " + std::to_string(i) + " has a non-finite predictor");
      }
    }
  }
  row_ids_.resize(samples_.size());
  std::iota(row_ids_.begin(), row_ids_.end(), std::size_t{0});
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names_ = feature_names_;
  out.samples_.reserve(indices.size());
  out.row_ids_.reserve(indices.size());
  for (std::size_t i : indices) {
    out.samples_.push_back(samples_.at(i));
    out.row_ids_.push_back(row_ids_[i]);
  }
  return out;
}

std::vector<double> Dataset::targets() const {
  std::vector<double> y(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) y[i] = samples_[i].target;
  return y;
}

FeatureMatrix Dataset::features() const {
  FeatureMatrix x(samples_.size(), feature_names_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    std::copy(samples_[i].predictors.begin(), samples_[i].predictors.end(), x.row(i).begin());
  }
  return x;
}

Dataset Dataset::with_features(std::vector<std::string> feature_names,
                               const FeatureMatrix& features) const {
  if (features.rows() != samples_.size() || features.cols() != feature_names.size()) {
    throw std::invalid_argument("replacement features do not match the dataset shape");
  }
  std::vector<Sample> samples = samples_;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = features.row(i);
    samples[i].predictors.assign(row.begin(), row.end());
  }
  Dataset out(std::move(feature_names), std::move(samples));
  out.row_ids_ = row_ids_;
  return out;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("dataset file not found: " + path.string());
  }
  const csv::Table table = csv::read_file(path);

  const auto target_col = table.column(schema.target);
  if (!target_col) throw std::runtime_error("schema column absent: " + schema.target);
  const auto station_col = table.column(schema.station);
  const auto time_col = table.column(schema.time);

  std::vector<std::string> feature_names = schema.features;
  std::vector<std::size_t> feature_cols;
  if (feature_names.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == *target_col || (station_col && c == *station_col) || (time_col && c == *time_col))
        continue;
      feature_names.push_back(table.header[c]);
      feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : feature_names) {
      const auto col = table.column(name);
      if (!col) throw std::runtime_error("schema column absent: " + name);
      feature_cols.push_back(*col);
    }
  }
  if (feature_cols.empty()) throw std::runtime_error("schema selects no feature columns");

  LoadReport report;
  std::vector<Sample> samples;
  samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      report.rejected.push_back({line, "expected " + std::to_string(table.header.size()) +
                                           " fields, found " + std::to_string(row.size())});
      continue;
    }
    const auto target = csv::parse_double(row[*target_col]);
    if (!target) {
      ++report.dropped;
      continue;
    }
    if (*target < 0.0) {
      report.rejected.push_back({line, "negative target " + row[*target_col]});
      continue;
    }

    Sample sample;
    sample.target = *target;
    sample.predictors.reserve(feature_cols.size());
    bool missing = false;
    std::optional<std::string> bad;
    for (std::size_t c : feature_cols) {
      if (csv::is_missing(row[c])) {
        missing = true;
        break;
      }
      const auto value = csv::parse_double(row[c]);
      if (!value) {
        bad = "non-numeric value '" + row[c] + "' in column " + table.header[c];
        break;
      }
      sample.predictors.push_back(*value);
    }
    if (bad) {
      report.rejected.push_back({line, *bad});
      continue;
    }
    if (missing) {
      ++report.dropped;
      continue;
    }
    if (station_col) sample.station_id = row[*station_col];
    if (time_col) {
      const auto t = csv::parse_integer(row[*time_col]);
      if (!t) {
        report.rejected.push_back({line, "non-integer time index '" + row[*time_col] + "'"});
        continue;
      }
      sample.time_index = *t;
    }
    samples.push_back(std::move(sample));
  }
  return {Dataset(std::move(feature_names), std::move(samples)), std::move(report)};
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path.string());
  std::vector<std::string> header = {"station_id", "time_index", "target"};
  header.insert(header.end(), dataset.feature_names().begin(), dataset.feature_names().end());
  out << csv::join(header) << '\n';
  std::vector<std::string> fields;
  for (const Sample& s : dataset.samples()) {
    fields.clear();
    fields.push_back(s.station_id);
    fields.push_back(std::to_string(s.time_index));
    fields.push_back(csv::format_double(s.target));
    for (double v : s.predictors) fields.push_back(csv::format_double(v));
    out << csv::join(fields) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

SplitPlan split_random(std::size_t n, std::size_t parts, std::uint64_t seed) {
  if (parts == 0) throw std::invalid_argument("split needs at least one part");
  if (n < parts) {
    throw std::invalid_argument("dataset too small: " + std::to_string(n) +
                                " samples for a " + std::to_string(parts) + "-way split");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitPlan plan;
  plan.seed = seed;
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t size = base + (p < extra ? 1 : 0);
    std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                  order.begin() + static_cast<std::ptrdiff_t>(offset + size));
    std::sort(part.begin(), part.end());
    plan.parts.push_back(std::move(part));
    offset += size;
  }
  return plan;
}

SplitPlan split_three_way(const Dataset& dataset, std::uint64_t seed) {
  return split_random(dataset.size(), 3, seed);
}

SplitPlan split_two_way(const Dataset& dataset, std::uint64_t seed) {
  return split_random(dataset.size(), 2, seed);
}

std::vector<std::size_t> merge_parts(const SplitPlan& plan, std::span<const std::size_t> which) {
  std::vector<std::size_t> out;
  for (std::size_t p : which) {
    const auto& part = plan.parts.at(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qstack
