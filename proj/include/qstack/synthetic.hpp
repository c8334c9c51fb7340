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

#ifndef QSTACK_SYNTHETIC_HPP_
#define QSTACK_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "qstack/dataset.hpp"
#include "qstack/features.hpp"
#include "qstack/levels.hpp"
#include "qstack/matrix.hpp"

namespace qstack {

// Targets are y = max(0, mu(x) + sigma(x) * eta). Censoring at zero is a
// monotone map, so the true tau-quantile is max(0, mu + sigma * q_eta(tau)).
enum class NoiseFamily { kGaussian, kLognormal };

std::string_view noise_name(NoiseFamily family);  // gaussian, lognormal
NoiseFamily parse_noise(std::string_view name);

// Quantile of the standardized noise: z_tau, or exp(z_tau) for lognormal.
double noise_quantile(NoiseFamily family, double tau);

// Tabular data: x_1 .. x_p ~ U(0, 1), only x_1 matters.
//   mu = intercept + slope * x_1,  sigma = noise_scale * (sigma0 + sigma1 * x_1).
struct TabularParams {
  std::size_t samples = 15000;
  std::size_t features = 1;
  double intercept = 10.0;
  double slope = 5.0;
  double sigma0 = 1.0;
  double sigma1 = 1.0;
  double noise_scale = 1.0;
  NoiseFamily noise = NoiseFamily::kGaussian;
};

// Gauges and two satellite grids over [0, width] x [0, height]. A smooth
// seasonal field drives both products (multiplicative noise for product_a,
// additive for product_b); the gauge target depends on the assembled
// predictors:
//   mu = weight_a * sum(product_a_k) + weight_b * sum(product_b_k)
//        + elevation_effect * elevation / 1000,
//   sigma = noise_scale * (sigma0 + sigma1 * mu).
struct SpatialParams {
  double width = 10.0;
  double height = 10.0;
  double spacing = 0.5;  // product_a; product_b uses 1.5 x spacing
  std::size_t stations = 150;
  std::int64_t months = 24;
  double product_noise = 0.2;
  double weight_a = 0.6;
  double weight_b = 0.4;
  double elevation_effect = 5.0;
  double sigma0 = 2.0;
  double sigma1 = 0.2;
  double noise_scale = 1.0;
  double missing_fraction = 0.0;  // share of gauge targets written as NA
  NoiseFamily noise = NoiseFamily::kGaussian;
};

// Throws std::invalid_argument for invalid parameters.
void validate(const TabularParams& params);
void validate(const SpatialParams& params);

struct SyntheticData {
  Dataset data;
  PredictionMatrix truth;  // true conditional quantiles, one row per sample
  // Spatial only: inputs in the features-module format.
  std::vector<SiteObservation> sites;
  std::vector<SatelliteProduct> products;
};

SyntheticData generate_tabular(const TabularParams& params, const QuantileLevelGrid& levels,
                               std::uint64_t seed);
SyntheticData generate_spatial(const SpatialParams& params, const QuantileLevelGrid& levels,
                               std::uint64_t seed);

// Tabular: data.csv and truth.csv. Spatial: sites.csv, product_a.csv,
// product_b.csv and truth.csv.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

// Quantile tables (truth.csv, prediction files): station_id, time_index and
// one column per level. Reading aligns rows with `data` by (station_id,
// time_index) and throws std::runtime_error when a sample has no row or a
// level column is missing.
PredictionMatrix read_quantile_csv(const std::filesystem::path& path, const Dataset& data,
                                const QuantileLevelGrid& levels);
void write_quantile_csv(const Dataset& data, const PredictionMatrix& truth,
                     const std::filesystem::path& path);

}  // namespace qstack

#endif  // QSTACK_SYNTHETIC_HPP_
