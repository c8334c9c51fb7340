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

#include "qstack/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "qstack/csv.hpp"

namespace qstack {
namespace {

struct Candidate {
  double distance;
  std::int64_t grid_id;
  std::size_t index;
};

std::array<std::size_t, 4> nearest_four_indices(double lon, double lat,
                                                std::span<const GridCell> grid,
                                                std::array<double, 4>& distances) {
  if (grid.size() < 4) throw std::invalid_argument("grid has fewer than 4 points");
  std::vector<Candidate> candidates;
  candidates.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::hypot(grid[i].lon - lon, grid[i].lat - lat);
    candidates.push_back({d, grid[i].grid_id, i});
  }
  auto less = [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.grid_id) < std::tie(b.distance, b.grid_id);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + 4, candidates.end(), less);
  std::array<std::size_t, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = candidates[k].index;
    distances[k] = std::max(candidates[k].distance, kCoincidentDistance);
  }
  return out;
}

struct ProductIndex {
  std::vector<GridCell> geometry;
  std::map<std::pair<std::int64_t, std::int64_t>, std::optional<double>> values;
  double min_lon = std::numeric_limits<double>::infinity();
  double max_lon = -std::numeric_limits<double>::infinity();
  double min_lat = std::numeric_limits<double>::infinity();
  double max_lat = -std::numeric_limits<double>::infinity();

  bool covers(const GaugeSite& site) const {
    return site.lon >= min_lon && site.lon <= max_lon && site.lat >= min_lat && site.lat <= max_lat;
  }
};

ProductIndex index_product(const SatelliteProduct& product) {
  ProductIndex index;
  std::unordered_map<std::int64_t, std::size_t> position;
  for (const GridRecord& r : product.records) {
    auto [it, inserted] = position.emplace(r.grid_id, index.geometry.size());
    if (inserted) {
      index.geometry.push_back({r.grid_id, r.lon, r.lat, 0.0});
      index.min_lon = std::min(index.min_lon, r.lon);
      index.max_lon = std::max(index.max_lon, r.lon);
      index.min_lat = std::min(index.min_lat, r.lat);
      index.max_lat = std::max(index.max_lat, r.lat);
    } else {
      const GridCell& known = index.geometry[it->second];
      if (known.lon != r.lon || known.lat != r.lat) {
        throw std::invalid_argument("product " + product.name + ": grid point " +
                                    std::to_string(r.grid_id) + " has inconsistent coordinates");
      }
    }
    index.values[{r.grid_id, r.month}] = r.value;
  }
  if (index.geometry.size() < 4) {
    throw std::invalid_argument("product " + product.name + " has fewer than 4 grid points");
  }
  return index;
}

}  // namespace

GridNeighborhood nearest_four(const GaugeSite& site, std::span<const GridCell> grid) {
  GridNeighborhood out;
  const auto idx = nearest_four_indices(site.lon, site.lat, grid, out.distances);
  for (std::size_t k = 0; k < 4; ++k) {
    out.values[k] = grid[idx[k]].value;
    out.grid_ids[k] = grid[idx[k]].grid_id;
  }
  return out;
}

std::array<double, 4> inverse_square_weights(const std::array<double, 4>& distances) {
  std::array<double, 4> inv{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(distances[k] > 0.0)) throw std::invalid_argument("distances must be positive");
    inv[k] = 1.0 / (distances[k] * distances[k]);
    total += inv[k];
  }
  for (double& w : inv) w /= total;
  return inv;
}

WeightedFeatures distance_weight(const GridNeighborhood& neighborhood) {
  double total = 0.0;
  std::array<double, 4> inv{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double d = neighborhood.distances[k];
    if (!(d > 0.0)) throw std::invalid_argument("distances must be positive");
    if (neighborhood.values[k] < 0.0) throw std::invalid_argument("grid values must be >= 0");
    inv[k] = 1.0 / (d * d);
    total += inv[k];
  }
  WeightedFeatures out;
  for (std::size_t k = 0; k < 4; ++k) {
    out.values[k] = inv[k] * neighborhood.values[k] / total;
  }
  return out;
}

AssemblyResult assemble_samples(std::span<const SiteObservation> sites,
                                std::span<const SatelliteProduct> products) {
  if (products.empty()) throw std::invalid_argument("assemble_samples needs at least one product");
  std::vector<ProductIndex> indexes;
  indexes.reserve(products.size());
  for (const auto& product : products) indexes.push_back(index_product(product));

  std::vector<const SiteObservation*> order;
  for (const auto& s : sites) {
    if (s.target.has_value()) order.push_back(&s);
  }
  std::sort(order.begin(), order.end(), [](const SiteObservation* a, const SiteObservation* b) {
    return std::tie(a->site.station_id, a->month) < std::tie(b->site.station_id, b->month);
  });

  std::vector<std::string> names;
  for (const auto& product : products) {
    for (int k = 1; k <= 4; ++k) names.push_back(product.name + "_" + std::to_string(k));
  }
  names.emplace_back("elevation");

  AssemblyResult result;
  // Neighbor positions per (station, product); a station's location is fixed.
  std::map<std::string, std::vector<std::array<std::size_t, 4>>> neighbors;
  std::map<std::string, std::vector<std::array<double, 4>>> distances;
  std::vector<Sample> samples;
  const SiteObservation* previous = nullptr;
  for (const SiteObservation* obs : order) {
    const std::string where = obs->site.station_id + " month " + std::to_string(obs->month);
    if (previous && previous->site.station_id == obs->site.station_id &&
        previous->month == obs->month) {
      ++result.skipped;
      result.issues.push_back(where + ": duplicate observation");
      continue;
    }
    previous = obs;
    if (*obs->target < 0.0 || !std::isfinite(*obs->target)) {
      ++result.skipped;
      result.issues.push_back(where + ": invalid target");
      continue;
    }

    auto cached = neighbors.find(obs->site.station_id);
    if (cached == neighbors.end()) {
      std::vector<std::array<std::size_t, 4>> per_product(products.size());
      std::vector<std::array<double, 4>> per_product_d(products.size());
      for (std::size_t p = 0; p < products.size(); ++p) {
        per_product[p] = nearest_four_indices(obs->site.lon, obs->site.lat,
                                              indexes[p].geometry, per_product_d[p]);
      }
      cached = neighbors.emplace(obs->site.station_id, std::move(per_product)).first;
      distances.emplace(obs->site.station_id, std::move(per_product_d));
    }
    const auto& site_d = distances.at(obs->site.station_id);

    Sample sample;
    sample.target = *obs->target;
    sample.station_id = obs->site.station_id;
    sample.time_index = obs->month;
    sample.predictors.reserve(names.size());
    std::string problem;
    for (std::size_t p = 0; p < products.size() && problem.empty(); ++p) {
      const ProductIndex& index = indexes[p];
      if (!index.covers(obs->site)) {
        problem = "outside the grid extent of " + products[p].name;
        break;
      }
      GridNeighborhood hood;
      hood.distances = site_d[p];
      for (std::size_t k = 0; k < 4; ++k) {
        const GridCell& cell = index.geometry[cached->second[p][k]];
        hood.grid_ids[k] = cell.grid_id;
        const auto it = index.values.find({cell.grid_id, obs->month});
        if (it == index.values.end() || !it->second.has_value()) {
          problem = products[p].name + " grid point " + std::to_string(cell.grid_id) +
                    " has no value";
          break;
        }
        hood.values[k] = *it->second;
      }
      if (!problem.empty()) break;
      const auto weighted = distance_weight(hood);
      sample.predictors.insert(sample.predictors.end(), weighted.values.begin(),
                               weighted.values.end());
    }
    if (!problem.empty()) {
      ++result.skipped;
      result.issues.push_back(where + ": " + problem);
      continue;
    }
    sample.predictors.push_back(obs->site.elevation);
    samples.push_back(std::move(sample));
  }
  result.dataset = Dataset(std::move(names), std::move(samples));
  return result;
}

namespace {

std::size_t require_column(const csv::Table& table, std::string_view name,
                           const std::filesystem::path& path) {
  const auto col = table.column(name);
  if (!col) throw std::runtime_error(path.string() + ": missing column " + std::string(name));
  return *col;
}

double require_number(const std::string& cell, std::size_t line, std::string_view what) {
  const auto v = csv::parse_double(cell);
  if (!v) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad " + std::string(what) +
                             " '" + cell + "'");
  }
  return *v;
}

std::int64_t require_integer(const std::string& cell, std::size_t line, std::string_view what) {
  const auto v = csv::parse_integer(cell);
  if (!v) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad " + std::string(what) +
                             " '" + cell + "'");
  }
  return *v;
}

}  // namespace

std::vector<SiteObservation> read_sites_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_id = require_column(table, "station_id", path);
  const std::size_t c_lon = require_column(table, "lon", path);
  const std::size_t c_lat = require_column(table, "lat", path);
  const std::size_t c_elev = require_column(table, "elevation", path);
  const std::size_t c_month = require_column(table, "month", path);
  const std::size_t c_target = require_column(table, "target", path);
  std::vector<SiteObservation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      throw std::runtime_error(path.string() + " line " + std::to_string(line) +
                               ": wrong field count");
    }
    SiteObservation obs;
    obs.site.station_id = row[c_id];
    obs.site.lon = require_number(row[c_lon], line, "lon");
    obs.site.lat = require_number(row[c_lat], line, "lat");
    obs.site.elevation = require_number(row[c_elev], line, "elevation");
    obs.month = require_integer(row[c_month], line, "month");
    if (!csv::is_missing(row[c_target])) {
      obs.target = csv::parse_double(row[c_target]);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

void write_sites_csv(std::span<const SiteObservation> sites, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "station_id,lon,lat,elevation,month,target\n";
  for (const auto& s : sites) {
    out << csv::escape(s.site.station_id) << ',' << csv::format_double(s.site.lon) << ','
        << csv::format_double(s.site.lat) << ',' << csv::format_double(s.site.elevation) << ','
        << s.month << ',' << (s.target ? csv::format_double(*s.target) : std::string("NA"))
        << '\n';
  }
}

std::vector<GridRecord> read_grid_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t c_id = require_column(table, "grid_id", path);
  const std::size_t c_lon = require_column(table, "lon", path);
  const std::size_t c_lat = require_column(table, "lat", path);
  const std::size_t c_month = require_column(table, "month", path);
  const std::size_t c_value = require_column(table, "value", path);
  std::vector<GridRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      throw std::runtime_error(path.string() + " line " + std::to_string(line) +
                               ": wrong field count");
    }
    GridRecord rec;
    rec.grid_id = require_integer(row[c_id], line, "grid_id");
    rec.lon = require_number(row[c_lon], line, "lon");
    rec.lat = require_number(row[c_lat], line, "lat");
    rec.month = require_integer(row[c_month], line, "month");
    if (!csv::is_missing(row[c_value])) {
      const double v = require_number(row[c_value], line, "value");
      if (v < 0.0) {
        throw std::runtime_error(path.string() + " line " + std::to_string(line) +
                                 ": negative satellite precipitation");
      }
      rec.value = v;
    }
    out.push_back(rec);
  }
  return out;
}

void write_grid_csv(std::span<const GridRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "grid_id,lon,lat,month,value\n";
  for (const auto& r : records) {
    out << r.grid_id << ',' << csv::format_double(r.lon) << ',' << csv::format_double(r.lat)
        << ',' << r.month << ',' << (r.value ? csv::format_double(*r.value) : std::string("NA"))
        << '\n';
  }
}

}  // namespace qstack
