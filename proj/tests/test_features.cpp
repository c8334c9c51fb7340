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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "qstack/features.hpp"
#include "test_support.hpp"

namespace qstack {
namespace {

std::vector<GridCell> unit_grid(int nx, int ny, double value = 1.0) {
  std::vector<GridCell> grid;
  std::int64_t id = 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) grid.push_back({id++, static_cast<double>(i), static_cast<double>(j), value});
  return grid;
}

TEST(NearestFour, CellCenterGivesCorners) {
  const auto grid = unit_grid(3, 3);
  const GridNeighborhood n = nearest_four({"s", 0.5, 0.5, 0.0}, grid);
  std::array<std::int64_t, 4> ids = n.grid_ids;
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::array<std::int64_t, 4>{1, 2, 4, 5}));
  for (double d : n.distances) EXPECT_DOUBLE_EQ(d, std::sqrt(0.5));
  // Equal distances fall back to grid id order.
  EXPECT_EQ(n.grid_ids, (std::array<std::int64_t, 4>{1, 2, 4, 5}));
}

TEST(NearestFour, CoincidentPointUsesFloor) {
  const auto grid = unit_grid(3, 3);
  const GridNeighborhood n = nearest_four({"s", 1.0, 1.0, 0.0}, grid);
  EXPECT_EQ(n.grid_ids[0], 5);
  EXPECT_EQ(n.distances[0], kCoincidentDistance);
  for (int k = 1; k < 4; ++k) EXPECT_DOUBLE_EQ(n.distances[k], 1.0);
  const WeightedFeatures w = distance_weight(n);
  EXPECT_NEAR(w.values[0], 1.0, 1e-12);
}

TEST(NearestFour, GridTooSmallThrows) {
  const auto grid = unit_grid(3, 1);
  EXPECT_THROW(nearest_four({"s", 0.0, 0.0, 0.0}, grid), std::invalid_argument);
}

TEST(NearestFour, MatchesExhaustiveScan) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 9.5);
  const auto grid = unit_grid(10, 10);
  for (int trial = 0; trial < 500; ++trial) {
    const GaugeSite site{"s", u(rng), u(rng), 0.0};
    std::vector<std::pair<double, std::int64_t>> all;
    for (const auto& c : grid) {
      all.emplace_back(std::max(std::hypot(c.lon - site.lon, c.lat - site.lat), kCoincidentDistance), c.grid_id);
    }
    std::sort(all.begin(), all.end());
    const GridNeighborhood n = nearest_four(site, grid);
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(n.grid_ids[k], all[k].second);
      EXPECT_DOUBLE_EQ(n.distances[k], all[k].first);
    }
    EXPECT_TRUE(std::is_sorted(n.distances.begin(), n.distances.end()));
  }
}

GridNeighborhood hood(std::array<double, 4> values, std::array<double, 4> distances) {
  GridNeighborhood n;
  n.values = values;
  n.distances = distances;
  n.grid_ids = {1, 2, 3, 4};
  return n;
}

TEST(DistanceWeight, EqualDistances) {
  const auto w = distance_weight(hood({4, 8, 12, 16}, {1, 1, 1, 1}));
  EXPECT_EQ(w.values, (std::array<double, 4>{1, 2, 3, 4}));
}

TEST(DistanceWeight, HandCase) {
  const auto w = distance_weight(hood({7, 0, 0, 0}, {1, 2, 2, 2}));
  EXPECT_EQ(w.values, (std::array<double, 4>{4, 0, 0, 0}));
}

TEST(DistanceWeight, RejectsNonPositiveDistanceAndNegativeValue) {
  EXPECT_THROW(distance_weight(hood({1, 1, 1, 1}, {0, 1, 1, 1})), std::invalid_argument);
  EXPECT_THROW(distance_weight(hood({-1, 1, 1, 1}, {1, 1, 1, 1})), std::invalid_argument);
}

TEST(DistanceWeight, Properties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.01, 5.0), val(0.0, 300.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 4> d, v;
    for (int k = 0; k < 4; ++k) {
      d[k] = dist(rng);
      v[k] = val(rng);
    }
    std::sort(d.begin(), d.end());
    const auto weights = inverse_square_weights(d);
    EXPECT_NEAR(std::accumulate(weights.begin(), weights.end(), 0.0), 1.0, 1e-12);

    const auto w = distance_weight(hood(v, d));
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 4; ++k) {
      num += v[k] / (d[k] * d[k]);
      den += 1.0 / (d[k] * d[k]);
      EXPECT_GE(w.values[k], 0.0);
    }
    EXPECT_NEAR(std::accumulate(w.values.begin(), w.values.end(), 0.0), num / den, 1e-10 * (1.0 + num / den));

    // Permuting the neighborhood permutes the output.
    std::array<int, 4> perm = {2, 0, 3, 1};
    std::array<double, 4> dp, vp;
    for (int k = 0; k < 4; ++k) {
      dp[k] = d[perm[k]];
      vp[k] = v[perm[k]];
    }
    const auto wp = distance_weight(hood(vp, dp));
    for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(wp.values[k], w.values[perm[k]]);
  }
}

TEST(DistanceWeight, CloserPointDominatesEqualValue) {
  const auto w = distance_weight(hood({5, 5, 5, 5}, {0.5, 1.0, 1.5, 2.0}));
  EXPECT_GT(w.values[0], w.values[1]);
  EXPECT_GT(w.values[1], w.values[2]);
  EXPECT_GT(w.values[2], w.values[3]);
}

std::vector<GridRecord> product_records(int months, double (*value)(std::int64_t, std::int64_t)) {
  std::vector<GridRecord> records;
  for (std::int64_t m = 1; m <= months; ++m) {
    std::int64_t id = 1;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i, ++id) {
        records.push_back({id, static_cast<double>(i), static_cast<double>(j), m, value(id, m)});
      }
  }
  return records;
}

double value_a(std::int64_t id, std::int64_t m) { return static_cast<double>(10 * id + m); }
double value_b(std::int64_t id, std::int64_t m) { return static_cast<double>(id * m); }

TEST(AssembleSamples, CountsAndLayout) {
  const std::vector<SatelliteProduct> products = {{"imerg", product_records(3, value_a)},
                                                  {"persiann", product_records(3, value_b)}};
  std::vector<SiteObservation> obs;
  for (const char* id : {"B", "A"}) {
    for (std::int64_t m = 3; m >= 1; --m) obs.push_back({{id, 0.5, 0.5, 120.0}, m, 1.0 * m});
  }
  const AssemblyResult r = assemble_samples(obs, products);
  ASSERT_EQ(r.dataset.size(), 6u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_EQ(r.dataset.feature_count(), 9u);
  EXPECT_EQ(r.dataset.feature_names(),
            (std::vector<std::string>{"imerg_1", "imerg_2", "imerg_3", "imerg_4", "persiann_1", "persiann_2",
                                      "persiann_3", "persiann_4", "elevation"}));
  EXPECT_EQ(r.dataset[0].station_id, "A");
  EXPECT_EQ(r.dataset[0].time_index, 1);
  EXPECT_EQ(r.dataset[5].station_id, "B");
  EXPECT_EQ(r.dataset[5].time_index, 3);
  EXPECT_EQ(r.dataset[0].predictors[8], 120.0);
}

TEST(AssembleSamples, HandEvaluatedWeights) {
  const std::vector<SatelliteProduct> products = {{"a", product_records(1, value_a)}};
  // Site at (0.25, 0.25): neighbors (0,0) id 1, (1,0) id 2 and (0,1) id 4
  // tie at sqrt(0.625), then (1,1) id 5.
  const std::vector<SiteObservation> obs = {{{"s", 0.25, 0.25, 7.0}, 1, 2.0}};
  const AssemblyResult r = assemble_samples(obs, products);
  ASSERT_EQ(r.dataset.size(), 1u);
  const double d2[4] = {0.125, 0.625, 0.625, 1.125};
  const double values[4] = {11, 21, 41, 51};
  double den = 0.0;
  for (double d : d2) den += 1.0 / d;
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.dataset[0].predictors[k], values[k] / d2[k] / den, 1e-12);
  EXPECT_EQ(r.dataset[0].predictors[4], 7.0);
}

TEST(AssembleSamples, MissingGridValueSkips) {
  auto records = product_records(1, value_a);
  records[0].value.reset();
  const std::vector<SatelliteProduct> products = {{"a", records}};
  const std::vector<SiteObservation> obs = {{{"s", 0.25, 0.25, 0.0}, 1, 2.0}};
  const AssemblyResult r = assemble_samples(obs, products);
  EXPECT_EQ(r.dataset.size(), 0u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_FALSE(r.issues.empty());
}

TEST(AssembleSamples, OutsideCoverageSkipsAndMissingTargetIsIgnored) {
  const std::vector<SatelliteProduct> products = {{"a", product_records(1, value_a)}};
  const std::vector<SiteObservation> obs = {{{"far", 9.0, 9.0, 0.0}, 1, 2.0},
                                            {{"none", 1.0, 1.0, 0.0}, 1, std::nullopt},
                                            {{"ok", 1.0, 1.0, 0.0}, 1, 3.0}};
  const AssemblyResult r = assemble_samples(obs, products);
  ASSERT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.dataset[0].station_id, "ok");
  EXPECT_EQ(r.skipped, 1u);
}

TEST(FeatureCsv, SitesAndGridsRoundTrip) {
  testing::TempDir dir;
  const std::vector<SiteObservation> obs = {{{"s1", 0.25, 0.5, 100.0}, 1, 2.5}, {{"s2", 1.0, 1.0, 0.0}, 2, std::nullopt}};
  write_sites_csv(obs, dir / "sites.csv");
  const auto back = read_sites_csv(dir / "sites.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].site.station_id, "s1");
  EXPECT_EQ(back[0].site.lat, 0.5);
  EXPECT_EQ(back[0].target, 2.5);
  EXPECT_FALSE(back[1].target.has_value());

  const auto records = product_records(2, value_b);
  write_grid_csv(records, dir / "grid.csv");
  const auto grid = read_grid_csv(dir / "grid.csv");
  ASSERT_EQ(grid.size(), records.size());
  EXPECT_EQ(grid[10].value, records[10].value);
  EXPECT_EQ(grid[10].month, records[10].month);
}

}  // namespace
}  // namespace qstack
