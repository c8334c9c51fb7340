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

#include "qstack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "qstack/csv.hpp"
#include "qstack/random.hpp"

namespace qstack {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("synthetic parameters: " + what);
}

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

double draw_noise(NoiseFamily family, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = normal(rng);
  return family == NoiseFamily::kGaussian ? z : std::exp(z);
}

PredictionMatrix true_quantiles(const std::vector<std::pair<double, double>>& mu_sigma,
                                NoiseFamily family, const QuantileLevelGrid& levels) {
  PredictionMatrix truth(levels, mu_sigma.size());
  std::vector<double> q(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) q[j] = noise_quantile(family, levels[j]);
  for (std::size_t i = 0; i < mu_sigma.size(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      truth(i, j) = std::max(0.0, mu_sigma[i].first + mu_sigma[i].second * q[j]);
    }
  }
  return truth;
}

double field(double lon, double lat, std::int64_t month, double width, double height) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  return 60.0 + 30.0 * std::sin(kTwoPi * lon / width) * std::cos(kTwoPi * lat / height) +
         20.0 * std::sin(kTwoPi * static_cast<double>(month) / 12.0);
}

struct Axis {
  std::vector<double> centers;
};

Axis make_axis(double extent, double spacing) {
  Axis axis;
  for (double c = spacing / 2.0; c < extent; c += spacing) axis.centers.push_back(c);
  return axis;
}

std::string key_of(const std::string& station, std::int64_t time) {
  return station + '\x1f' + std::to_string(time);
}

}  // namespace

std::string_view noise_name(NoiseFamily family) {
  return family == NoiseFamily::kGaussian ? "gaussian" : "lognormal";
}

NoiseFamily parse_noise(std::string_view name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "lognormal") return NoiseFamily::kLognormal;
  throw std::invalid_argument("unknown noise family: " + std::string(name));
}

double noise_quantile(NoiseFamily family, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("quantile level outside (0, 1)");
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), tau);
  return family == NoiseFamily::kGaussian ? z : std::exp(z);
}

void validate(const TabularParams& p) {
  require(p.samples >= 1, "samples must be >= 1");
  require(p.features >= 1, "features must be >= 1");
  require(std::isfinite(p.intercept) && std::isfinite(p.slope), "intercept and slope must be finite");
  require(finite_nonnegative(p.sigma0) && finite_nonnegative(p.sigma1), "sigma0 and sigma1 must be >= 0");
  require(finite_nonnegative(p.noise_scale), "noise_scale must be >= 0");
}

void validate(const SpatialParams& p) {
  require(std::isfinite(p.width) && p.width > 0.0, "width must be positive");
  require(std::isfinite(p.height) && p.height > 0.0, "height must be positive");
  require(std::isfinite(p.spacing) && p.spacing > 0.0, "spacing must be positive");
  require(p.width >= 3.0 * p.spacing && p.height >= 3.0 * p.spacing,
          "domain must hold at least two product_b cells per axis");
  require(p.stations >= 1, "stations must be >= 1");
  require(p.months >= 1, "months must be >= 1");
  require(finite_nonnegative(p.product_noise), "product_noise must be >= 0");
  require(finite_nonnegative(p.weight_a) && finite_nonnegative(p.weight_b), "weights must be >= 0");
  require(finite_nonnegative(p.elevation_effect), "elevation_effect must be >= 0");
  require(finite_nonnegative(p.sigma0) && finite_nonnegative(p.sigma1), "sigma0 and sigma1 must be >= 0");
  require(finite_nonnegative(p.noise_scale), "noise_scale must be >= 0");
  require(p.missing_fraction >= 0.0 && p.missing_fraction < 1.0, "missing_fraction must be in [0, 1)");
}

SyntheticData generate_tabular(const TabularParams& params, const QuantileLevelGrid& levels,
                               std::uint64_t seed) {
  validate(params);
  Rng rng(derive_seed(seed, stream::kSynthetic, 1));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::string> names;
  for (std::size_t f = 0; f < params.features; ++f) names.push_back("x" + std::to_string(f + 1));

  std::vector<Sample> samples(params.samples);
  std::vector<std::pair<double, double>> mu_sigma(params.samples);
  for (std::size_t i = 0; i < params.samples; ++i) {
    Sample& s = samples[i];
    s.time_index = static_cast<std::int64_t>(i);
    s.predictors.resize(params.features);
    for (double& v : s.predictors) v = uniform(rng);
    const double x1 = s.predictors[0];
    const double mu = params.intercept + params.slope * x1;
    const double sigma = params.noise_scale * (params.sigma0 + params.sigma1 * x1);
    const double eta = draw_noise(params.noise, rng);
    s.target = std::max(0.0, mu + sigma * eta);
    mu_sigma[i] = {mu, sigma};
  }
  SyntheticData out;
  out.truth = true_quantiles(mu_sigma, params.noise, levels);
  out.data = Dataset(std::move(names), std::move(samples));
  return out;
}

SyntheticData generate_spatial(const SpatialParams& params, const QuantileLevelGrid& levels,
                               std::uint64_t seed) {
  validate(params);
  Rng grid_rng(derive_seed(seed, stream::kSynthetic, 2));
  Rng site_rng(derive_seed(seed, stream::kSynthetic, 3));
  Rng target_rng(derive_seed(seed, stream::kSynthetic, 4));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const double spacings[2] = {params.spacing, 1.5 * params.spacing};
  const char* names[2] = {"product_a", "product_b"};
  double lo_lon = 0.0, hi_lon = params.width, lo_lat = 0.0, hi_lat = params.height;

  SyntheticData out;
  for (int p = 0; p < 2; ++p) {
    const Axis lon = make_axis(params.width, spacings[p]);
    const Axis lat = make_axis(params.height, spacings[p]);
    lo_lon = std::max(lo_lon, lon.centers.front());
    hi_lon = std::min(hi_lon, lon.centers.back());
    lo_lat = std::max(lo_lat, lat.centers.front());
    hi_lat = std::min(hi_lat, lat.centers.back());
    SatelliteProduct product{names[p], {}};
    for (std::int64_t m = 1; m <= params.months; ++m) {
      std::int64_t id = 1;
      for (double y : lat.centers) {
        for (double x : lon.centers) {
          const double truth = field(x, y, m, params.width, params.height);
          const double z = normal(grid_rng);
          const double value =
              p == 0 ? truth * std::exp(params.product_noise * z -
                                        params.product_noise * params.product_noise / 2.0)
                     : std::max(0.0, truth + 50.0 * params.product_noise * z);
          product.records.push_back({id++, x, y, m, value});
        }
      }
    }
    out.products.push_back(std::move(product));
  }

  std::vector<SiteObservation> observations;
  std::vector<GaugeSite> sites(params.stations);
  const int width = static_cast<int>(std::to_string(params.stations).size());
  for (std::size_t s = 0; s < params.stations; ++s) {
    std::string id = std::to_string(s + 1);
    sites[s].station_id = "S" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    sites[s].lon = lo_lon + (hi_lon - lo_lon) * uniform(site_rng);
    sites[s].lat = lo_lat + (hi_lat - lo_lat) * uniform(site_rng);
    sites[s].elevation = 3000.0 * uniform(site_rng);
    for (std::int64_t m = 1; m <= params.months; ++m) observations.push_back({sites[s], m, 0.0});
  }

  AssemblyResult assembled = assemble_samples(observations, out.products);
  if (assembled.skipped > 0) {
    throw std::logic_error("synthetic sites fell outside the product grids");
  }
  const Dataset& base = assembled.dataset;
  const std::size_t per_product = 4;

  std::map<std::string, double> targets;
  std::vector<Sample> kept;
  std::vector<std::pair<double, double>> mu_sigma;
  for (const Sample& s : base.samples()) {
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t k = 0; k < per_product; ++k) {
      sum_a += s.predictors[k];
      sum_b += s.predictors[per_product + k];
    }
    const double elevation = s.predictors[2 * per_product];
    const double mu = params.weight_a * sum_a + params.weight_b * sum_b +
                      params.elevation_effect * elevation / 1000.0;
    const double sigma = params.noise_scale * (params.sigma0 + params.sigma1 * mu);
    const double eta = draw_noise(params.noise, target_rng);
    const bool missing = uniform(target_rng) < params.missing_fraction;
    if (missing) continue;
    Sample sample = s;
    sample.target = std::max(0.0, mu + sigma * eta);
    targets[key_of(s.station_id, s.time_index)] = sample.target;
    kept.push_back(std::move(sample));
    mu_sigma.emplace_back(mu, sigma);
  }

  for (SiteObservation& o : observations) {
    const auto it = targets.find(key_of(o.site.station_id, o.month));
    o.target = it == targets.end() ? std::nullopt : std::optional<double>(it->second);
  }
  out.sites = std::move(observations);
  out.truth = true_quantiles(mu_sigma, params.noise, levels);
  out.data = Dataset(base.feature_names(), std::move(kept));
  return out;
}

void write_quantile_csv(const Dataset& data, const PredictionMatrix& truth,
                     const std::filesystem::path& path) {
  if (truth.rows() != data.size()) throw std::invalid_argument("truth rows differ from samples");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::vector<std::string> header = {"station_id", "time_index"};
  for (std::size_t j = 0; j < truth.levels().size(); ++j) header.push_back(truth.levels().label(j));
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> fields = {data[i].station_id, std::to_string(data[i].time_index)};
    for (double v : truth.row(i)) fields.push_back(csv::format_double(v));
    out << csv::join(fields) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PredictionMatrix read_quantile_csv(const std::filesystem::path& path, const Dataset& data,
                                const QuantileLevelGrid& levels) {
  const csv::Table table = csv::read_file(path);
  const auto station = table.column("station_id");
  const auto time = table.column("time_index");
  if (!station || !time) throw std::runtime_error(path.string() + ": missing station_id or time_index");
  std::vector<std::size_t> level_columns;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    std::optional<std::size_t> found;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const auto v = csv::parse_double(table.header[c]);
      if (v && *v == levels[j]) found = c;
    }
    if (!found) throw std::runtime_error(path.string() + ": no truth column for level " + levels.label(j));
    level_columns.push_back(*found);
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    index[key_of(table.rows[r][*station], std::stoll(table.rows[r][*time]))] = r;
  }
  PredictionMatrix truth(levels, data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto it = index.find(key_of(data[i].station_id, data[i].time_index));
    if (it == index.end()) {
      throw std::runtime_error(path.string() + ": no truth for station '" + data[i].station_id +
                               "' at time " + std::to_string(data[i].time_index));
    }
    const auto& row = table.rows[it->second];
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const auto v = csv::parse_double(row[level_columns[j]]);
      if (!v) throw std::runtime_error(path.string() + ": bad truth value on line " +
                                       std::to_string(table.line_numbers[it->second]));
      truth(i, j) = *v;
    }
  }
  return truth;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (data.products.empty()) {
    write_csv(data.data, dir / "data.csv");
  } else {
    write_sites_csv(data.sites, dir / "sites.csv");
    for (const SatelliteProduct& p : data.products) write_grid_csv(p.records, dir / (p.name + ".csv"));
  }
  write_quantile_csv(data.data, data.truth, dir / "truth.csv");
}

}  // namespace qstack
