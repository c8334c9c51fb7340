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

#include "qstack/quantile_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "qstack/parallel.hpp"
#include "qstack/random.hpp"

namespace qstack {
namespace {

struct PendingNode {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
};

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

ForestTree grow_tree(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params,
                     std::size_t mtry, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = y.size();
  const std::size_t p = x.cols();
  const auto min_leaf = static_cast<std::size_t>(params.min_leaf);

  // Honest trees choose splits on one half and fill leaves with the other.
  std::vector<std::uint32_t> grow(n);
  std::iota(grow.begin(), grow.end(), 0u);
  std::vector<std::uint32_t> fill_from;
  if (params.honest && n >= 2) {
    std::shuffle(grow.begin(), grow.end(), rng);
    fill_from.assign(grow.begin() + static_cast<std::ptrdiff_t>(n / 2), grow.end());
    grow.resize(n / 2);
  }
  std::vector<std::uint32_t> idx(grow.size());
  if (params.bootstrap) {
    std::uniform_int_distribution<std::size_t> pick(0, grow.size() - 1);
    for (auto& i : idx) i = grow[pick(rng)];
  } else {
    idx = grow;
  }
  const std::size_t sample = idx.size();

  ForestTree out;
  out.tree.nodes.emplace_back();
  std::vector<PendingNode> stack = {{0, 0, sample}};
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), std::size_t{0});
  std::vector<std::pair<double, double>> buf;

  while (!stack.empty()) {
    const PendingNode pending = stack.back();
    stack.pop_back();
    const std::size_t m = pending.end - pending.begin;
    const int depth = out.tree.nodes[pending.node].depth;
    if (m < 2 * min_leaf || (params.max_depth > 0 && depth >= params.max_depth)) continue;

    double total = 0.0;
    bool pure = true;
    const double first = y[idx[pending.begin]];
    for (std::size_t pos = pending.begin; pos < pending.end; ++pos) {
      total += y[idx[pos]];
      pure = pure && y[idx[pos]] == first;
    }
    if (pure) continue;

    for (std::size_t k = 0; k < mtry; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, p - 1);
      std::swap(features[k], features[pick(rng)]);
    }
    const double parent_score = total * total / static_cast<double>(m);
    BestSplit best;
    best.score = parent_score;
    for (std::size_t k = 0; k < mtry; ++k) {
      const std::size_t f = features[k];
      buf.clear();
      for (std::size_t pos = pending.begin; pos < pending.end; ++pos) {
        buf.emplace_back(x(idx[pos], f), y[idx[pos]]);
      }
      std::sort(buf.begin(), buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (buf.front().first == buf.back().first) continue;
      double left = 0.0;
      for (std::size_t c = 1; c < m; ++c) {
        left += buf[c - 1].second;
        if (c < min_leaf || m - c < min_leaf) continue;
        if (buf[c - 1].first == buf[c].first) continue;
        const double right = total - left;
        const double score = left * left / static_cast<double>(c) +
                             right * right / static_cast<double>(m - c);
        if (score > best.score) {
          const double lo = buf[c - 1].first;
          const double hi = buf[c].first;
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid < hi)) mid = lo;
          best = {static_cast<int>(f), mid, score};
        }
      }
    }
    if (best.feature < 0 || best.score <= parent_score * (1.0 + 1e-12)) continue;

    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid_it =
        std::partition(idx.begin() + static_cast<std::ptrdiff_t>(pending.begin),
                       idx.begin() + static_cast<std::ptrdiff_t>(pending.end),
                       [&](std::uint32_t i) { return x(i, f) <= best.threshold; });
    const auto split = static_cast<std::size_t>(mid_it - idx.begin());

    const auto left_id = out.tree.nodes.size();
    TreeNode child;
    child.depth = depth + 1;
    out.tree.nodes.push_back(child);
    out.tree.nodes.push_back(child);
    TreeNode& parent = out.tree.nodes[pending.node];
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = static_cast<std::int32_t>(left_id);
    parent.right = static_cast<std::int32_t>(left_id + 1);
    stack.push_back({left_id + 1, split, pending.end});
    stack.push_back({left_id, pending.begin, split});
  }

  // Leaves hold every training observation that reaches them, each once;
  // honest trees use the held-out half and fall back to the splitting half
  // for leaves it leaves empty.
  const std::size_t nodes = out.tree.nodes.size();
  if (fill_from.empty()) fill_from = std::move(grow);
  std::vector<std::uint32_t> leaf_of(n, 0);
  std::vector<std::uint32_t> count(nodes + 1, 0);
  for (std::uint32_t i : fill_from) {
    leaf_of[i] = static_cast<std::uint32_t>(out.tree.leaf_of(x, i));
    ++count[leaf_of[i] + 1];
  }
  if (fill_from.size() < n) {
    std::vector<char> held(n, 0);
    for (std::uint32_t i : fill_from) held[i] = 1;
    std::vector<char> empty(nodes, 0);
    for (std::size_t node = 0; node < nodes; ++node) empty[node] = count[node + 1] == 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (held[i]) continue;
      const auto leaf = static_cast<std::uint32_t>(out.tree.leaf_of(x, i));
      if (!empty[leaf]) continue;
      leaf_of[i] = leaf;
      ++count[leaf + 1];
      fill_from.push_back(i);
    }
    std::sort(fill_from.begin(), fill_from.end());
  }
  for (std::size_t node = 0; node < nodes; ++node) count[node + 1] += count[node];
  out.member_begin.assign(nodes, 0);
  out.member_end.assign(nodes, 0);
  for (std::size_t node = 0; node < nodes; ++node) {
    if (!out.tree.nodes[node].is_leaf()) continue;
    out.member_begin[node] = count[node];
    out.member_end[node] = count[node + 1];
  }
  out.members.resize(fill_from.size());
  std::vector<std::uint32_t> next(count.begin(), count.end() - 1);
  for (std::uint32_t i : fill_from) out.members[next[leaf_of[i]]++] = i;
  return out;
}

}  // namespace

QuantileForestModel::QuantileForestModel(LearnerSpec spec, QuantileLevelGrid levels,
                                         std::vector<std::string> feature_names,
                                         std::vector<double> train_targets,
                                         std::vector<ForestTree> trees)
    : QuantileModel(std::move(spec), std::move(levels), std::move(feature_names)),
      targets_(std::move(train_targets)),
      trees_(std::move(trees)) {
  std::vector<std::uint32_t> order(targets_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return targets_[a] < targets_[b]; });
  rank_.resize(targets_.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
}

void QuantileForestModel::predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const {
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (x.rows() + kChunk - 1) / kChunk;
  const auto& levels = out.levels();
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> weight(targets_.size(), 0.0);
    std::vector<std::uint32_t> touched;
    const std::size_t stop = std::min(x.rows(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < stop; ++i) {
      touched.clear();
      const auto row = x.row(i);
      for (const ForestTree& t : trees_) {
        const std::size_t leaf = t.tree.leaf_of(row);
        const std::uint32_t b = t.member_begin[leaf];
        const std::uint32_t e = t.member_end[leaf];
        const double w = 1.0 / static_cast<double>(e - b);
        for (std::uint32_t k = b; k < e; ++k) {
          const std::uint32_t member = t.members[k];
          if (weight[member] == 0.0) touched.push_back(member);
          weight[member] += w;
        }
      }
      std::sort(touched.begin(), touched.end(),
                [&](std::uint32_t a, std::uint32_t b) { return rank_[a] < rank_[b]; });
      double total = 0.0;
      for (std::uint32_t m : touched) total += weight[m];
      const double slack = 1e-12 * total;
      double cumulative = 0.0;
      std::size_t j = 0;
      for (std::uint32_t m : touched) {
        cumulative += weight[m];
        while (j < levels.size() && cumulative >= levels[j] * total - slack) {
          out(i, j++) = targets_[m];
        }
        weight[m] = 0.0;
      }
      for (; j < levels.size(); ++j) out(i, j) = targets_[touched.back()];
    }
  });
}

std::shared_ptr<const QuantileForestModel> fit_quantile_forest(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names) {
  const auto& params = std::get<ForestParams>(spec.params);
  const std::size_t p = x.cols();
  std::size_t mtry = params.mtry > 0 ? static_cast<std::size_t>(params.mtry)
                                     : static_cast<std::size_t>(std::ceil(static_cast<double>(p) / 3.0));
  mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(p, 1));

  std::vector<ForestTree> trees(static_cast<std::size_t>(params.trees));
  const auto kind = static_cast<std::uint64_t>(spec.kind());
  parallel_for(trees.size(), [&](std::size_t t) {
    trees[t] = grow_tree(x, y, params, mtry, derive_seed(spec.seed, kind, stream::kForestTree + (t << 8)));
  });
  return std::make_shared<QuantileForestModel>(spec, levels, std::move(feature_names),
                                               std::vector<double>(y.begin(), y.end()),
                                               std::move(trees));
}

}  // namespace qstack
