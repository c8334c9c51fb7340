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

#ifndef QSTACK_FEATURES_HPP_
#define QSTACK_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qstack/dataset.hpp"

namespace qstack {

// Distance substituted for a station that coincides with a grid point.
inline constexpr double kCoincidentDistance = 1e-9;

struct GaugeSite {
  std::string station_id;
  double lon = 0.0;
  double lat = 0.0;
  double elevation = 0.0;  // meters
};

struct GridCell {
  std::int64_t grid_id = 0;
  double lon = 0.0;
  double lat = 0.0;
  double value = 0.0;  // satellite precipitation, mm/month
};

// The four grid points closest to a site, nearest first.
struct GridNeighborhood {
  std::array<double, 4> values{};
  std::array<double, 4> distances{};
  std::array<std::int64_t, 4> grid_ids{};
};

struct WeightedFeatures {
  std::array<double, 4> values{};
};

// Euclidean distance in the coordinate plane; ties broken by ascending
// grid id. Distances below kCoincidentDistance are raised to it.
// Throws std::invalid_argument when the grid has fewer than 4 points.
GridNeighborhood nearest_four(const GaugeSite& site, std::span<const GridCell> grid);

// Normalized inverse-square-distance weights (1/d_k^2) / sum_i (1/d_i^2).
std::array<double, 4> inverse_square_weights(const std::array<double, 4>& distances);

// Splits the inverse-square-distance interpolant into four weighted values:
// out_k = (1/d_k^2) PR_k / sum_i (1/d_i^2). Output order follows input order.
// Throws std::invalid_argument for non-positive distances or negative values.
WeightedFeatures distance_weight(const GridNeighborhood& neighborhood);

struct SiteObservation {
  GaugeSite site;
  std::int64_t month = 0;
  std::optional<double> target;
};

struct GridRecord {
  std::int64_t grid_id = 0;
  double lon = 0.0;
  double lat = 0.0;
  std::int64_t month = 0;
  std::optional<double> value;
};

struct SatelliteProduct {
  std::string name;
  std::vector<GridRecord> records;
};

struct AssemblyResult {
  Dataset dataset;
  std::size_t skipped = 0;
  std::vector<std::string> issues;
};

// Builds one sample per (site, month) with a target. Predictors are laid out
// product by product (weighted values 1..4 each), then elevation. Samples are
// ordered by station id, then month. Site-months outside a product's grid
// extent or lacking one of the four grid values are skipped and reported.
AssemblyResult assemble_samples(std::span<const SiteObservation> sites,
                                std::span<const SatelliteProduct> products);

// station_id,lon,lat,elevation,month,target (target may be empty or NA).
std::vector<SiteObservation> read_sites_csv(const std::filesystem::path& path);
void write_sites_csv(std::span<const SiteObservation> sites, const std::filesystem::path& path);

// grid_id,lon,lat,month,value (value may be empty or NA).
std::vector<GridRecord> read_grid_csv(const std::filesystem::path& path);
void write_grid_csv(std::span<const GridRecord> records, const std::filesystem::path& path);

}  // namespace qstack

#endif  // QSTACK_FEATURES_HPP_
