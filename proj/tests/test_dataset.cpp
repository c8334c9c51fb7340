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
#include <numeric>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "qstack/dataset.hpp"
#include "qstack/levels.hpp"
#include "test_support.hpp"

namespace qstack {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(LoadCsv, AllValidRows) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a,b\n1,2,3\n4,5,6\n0,7.5,-1\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 3u);
  EXPECT_EQ(r.report.dropped, 0u);
  EXPECT_TRUE(r.report.rejected.empty());
  EXPECT_EQ(r.dataset.feature_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.dataset[2].predictors, (std::vector<double>{7.5, -1.0}));
}

TEST(LoadCsv, EmptyTargetIsDropped) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a\n1,2\n,3\n4,5\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 2u);
  EXPECT_EQ(r.report.dropped, 1u);
}

TEST(LoadCsv, NaTargetAndUnparseableTargetAreDropped) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a\nNA,2\nabc,3\n4,5\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.report.dropped, 2u);
}

TEST(LoadCsv, NegativeTargetIsRejectedWithLineNumber) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a\n1,2\n-5,3\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 1u);
  ASSERT_EQ(r.report.rejected.size(), 1u);
  EXPECT_EQ(r.report.rejected[0].line, 3u);
}

TEST(LoadCsv, NonNumericFeatureIsRejectedWithLineNumber) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a\n1,2\n2,three\n3,4\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 2u);
  ASSERT_EQ(r.report.rejected.size(), 1u);
  EXPECT_EQ(r.report.rejected[0].line, 3u);
}

TEST(LoadCsv, MissingFeatureDropsRow) {
  TempDir dir;
  write_text(dir / "d.csv", "target,a,b\n1,2,\n2,3,4\n");
  const LoadResult r = load_csv(dir / "d.csv");
  EXPECT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.report.dropped, 1u);
}

TEST(LoadCsv, FeatureOrderFollowsSchema) {
  TempDir dir;
  write_text(dir / "d.csv", "a,y,b,c\n1,2,3,4\n");
  CsvSchema schema;
  schema.target = "y";
  schema.features = {"c", "a"};
  const LoadResult r = load_csv(dir / "d.csv", schema);
  EXPECT_EQ(r.dataset.feature_names(), (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(r.dataset[0].predictors, (std::vector<double>{4.0, 1.0}));
  EXPECT_EQ(r.dataset[0].target, 2.0);
}

TEST(LoadCsv, MissingFileAndAbsentColumnThrow) {
  TempDir dir;
  EXPECT_THROW(load_csv(dir / "nope.csv"), std::runtime_error);
  write_text(dir / "d.csv", "target,a\n1,2\n");
  CsvSchema schema;
  schema.features = {"zz"};
  EXPECT_THROW(load_csv(dir / "d.csv", schema), std::runtime_error);
  schema = {};
  schema.target = "missing";
  EXPECT_THROW(load_csv(dir / "d.csv", schema), std::runtime_error);
}

TEST(LoadCsv, RoundTripIsIdentical) {
  TempDir dir;
  const Dataset original = testing::heteroscedastic(200, 3, 17);
  std::vector<Sample> samples = original.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].station_id = "st," + std::to_string(i % 7);
    samples[i].predictors[1] = 1.0 / 3.0 + static_cast<double>(i) * 1e-17;
  }
  const Dataset data(original.feature_names(), samples);
  write_csv(data, dir / "a.csv");
  const LoadResult first = load_csv(dir / "a.csv");
  EXPECT_EQ(first.dataset, data);
  write_csv(first.dataset, dir / "b.csv");
  EXPECT_EQ(load_csv(dir / "b.csv").dataset, first.dataset);
  EXPECT_EQ(testing::read_text(dir / "a.csv"), testing::read_text(dir / "b.csv"));
}

TEST(DatasetInvariants, ConstructorValidates) {
  EXPECT_THROW(Dataset({"a"}, {Sample{1.0, {1.0, 2.0}, "s", 0}}), std::invalid_argument);
  EXPECT_THROW(Dataset({"a"}, {Sample{-1.0, {1.0}, "s", 0}}), std::invalid_argument);
  EXPECT_THROW(Dataset({"a"}, {Sample{1.0, {std::nan("")}, "s", 0}}), std::invalid_argument);
}

TEST(DatasetInvariants, SubsetKeepsRowIds) {
  const Dataset d = testing::heteroscedastic(10, 1, 3);
  const std::vector<std::size_t> idx = {7, 2, 5};
  const Dataset s = d.subset(idx);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(std::vector<std::size_t>(s.row_ids().begin(), s.row_ids().end()), idx);
  const std::vector<std::size_t> again = {2};
  EXPECT_EQ(s.subset(again).row_ids()[0], 5u);
  EXPECT_EQ(s[0], d[7]);
}

void expect_partition(const SplitPlan& plan, std::size_t n) {
  std::vector<int> seen(n, 0);
  std::size_t lo = n, hi = 0;
  for (const auto& part : plan.parts) {
    lo = std::min(lo, part.size());
    hi = std::max(hi, part.size());
    for (std::size_t i : part) {
      ASSERT_LT(i, n);
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "index " << i;
  EXPECT_LE(hi - lo, 1u);
}

std::vector<std::size_t> sizes(const SplitPlan& plan) {
  std::vector<std::size_t> out;
  for (const auto& p : plan.parts) out.push_back(p.size());
  return out;
}

TEST(Split, ThreeWaySizes) {
  EXPECT_EQ(sizes(split_three_way(testing::heteroscedastic(9, 1, 1), 5)), (std::vector<std::size_t>{3, 3, 3}));
  EXPECT_EQ(sizes(split_three_way(testing::heteroscedastic(10, 1, 1), 5)), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(sizes(split_three_way(testing::heteroscedastic(11, 1, 1), 5)), (std::vector<std::size_t>{4, 4, 3}));
}

TEST(Split, TwoWaySizes) {
  EXPECT_EQ(sizes(split_two_way(testing::heteroscedastic(8, 1, 1), 5)), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(sizes(split_two_way(testing::heteroscedastic(9, 1, 1), 5)), (std::vector<std::size_t>{5, 4}));
}

TEST(Split, TooSmallThrows) {
  EXPECT_THROW(split_three_way(testing::heteroscedastic(2, 1, 1), 1), std::invalid_argument);
  EXPECT_THROW(split_two_way(testing::heteroscedastic(1, 1, 1), 1), std::invalid_argument);
}

TEST(Split, PartitionPropertyOverSizesAndSeeds) {
  for (std::size_t n = 3; n < 60; n += 7) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      expect_partition(split_random(n, 3, seed), n);
      expect_partition(split_random(n, 2, seed), n);
    }
  }
}

TEST(Split, SeedDeterminism) {
  const Dataset d = testing::heteroscedastic(100, 1, 1);
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xffffffffffffull}) {
    EXPECT_EQ(split_three_way(d, seed), split_three_way(d, seed));
    EXPECT_EQ(split_two_way(d, seed), split_two_way(d, seed));
  }
  EXPECT_NE(split_three_way(d, 1).parts, split_three_way(d, 2).parts);
}

TEST(Split, MergePartsIsSortedUnion) {
  const SplitPlan plan = split_random(30, 3, 9);
  const std::vector<std::size_t> which = {0, 2};
  const auto merged = merge_parts(plan, which);
  EXPECT_TRUE(std::is_sorted(merged.begin(), merged.end()));
  EXPECT_EQ(merged.size(), plan.parts[0].size() + plan.parts[2].size());
  std::set<std::size_t> s(merged.begin(), merged.end());
  for (std::size_t i : plan.parts[1]) EXPECT_FALSE(s.count(i));
}

TEST(Levels, FullGridAndParsing) {
  const auto full = QuantileLevelGrid::full_default();
  ASSERT_EQ(full.size(), 15u);
  EXPECT_DOUBLE_EQ(full[0], 0.025);
  EXPECT_DOUBLE_EQ(full[4], 0.2);
  EXPECT_DOUBLE_EQ(full[14], 0.975);
  EXPECT_EQ(QuantileLevelGrid::parse("full"), full);
  EXPECT_EQ(QuantileLevelGrid::parse("0.1,0.5,0.9"), QuantileLevelGrid::ci_default());
  EXPECT_THROW(QuantileLevelGrid({0.5, 0.1}), std::invalid_argument);
  EXPECT_THROW(QuantileLevelGrid({0.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(QuantileLevelGrid({0.5, 1.0}), std::invalid_argument);
  EXPECT_THROW(QuantileLevelGrid({0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(QuantileLevelGrid(std::vector<double>{}), std::invalid_argument);
}

}  // namespace
}  // namespace qstack
