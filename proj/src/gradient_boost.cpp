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

#include "qstack/gradient_boost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "qstack/parallel.hpp"
#include "qstack/random.hpp"
#include "qstack/scoring.hpp"
#include "qstack/smooth_pinball.hpp"
#include "qstack/standardizer.hpp"

namespace qstack {
namespace {

// Per-feature split thresholds and the bin of every training value.
// bin(v) = number of thresholds strictly below v, so v <= t[b] iff bin <= b.
struct BinnedFeatures {
  std::size_t rows = 0;
  std::vector<std::vector<double>> thresholds;
  std::vector<std::uint16_t> bins;  // column-major

  std::uint16_t bin(std::size_t i, std::size_t f) const { return bins[f * rows + i]; }
};

BinnedFeatures bin_features(const FeatureMatrix& x, int max_bins) {
  BinnedFeatures out;
  out.rows = x.rows();
  out.thresholds.resize(x.cols());
  out.bins.resize(x.rows() * x.cols());
  std::vector<double> values;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    values.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) values[i] = x(i, f);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const std::size_t u = values.size();
    const auto bins = static_cast<std::size_t>(max_bins);
    auto& t = out.thresholds[f];
    auto midpoint = [&](std::size_t k) {
      const double lo = values[k - 1];
      const double hi = values[k];
      const double mid = lo + 0.5 * (hi - lo);
      return mid < hi ? mid : lo;
    };
    if (u <= bins) {
      for (std::size_t k = 1; k < u; ++k) t.push_back(midpoint(k));
    } else {
      for (std::size_t q = 1; q < bins; ++q) {
        const std::size_t k = q * u / bins;
        if (k >= 1 && k < u) t.push_back(midpoint(k));
      }
      t.erase(std::unique(t.begin(), t.end()), t.end());
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto pos = std::lower_bound(t.begin(), t.end(), x(i, f)) - t.begin();
      out.bins[f * x.rows() + i] = static_cast<std::uint16_t>(pos);
    }
  }
  return out;
}

struct NodeRange {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
};

// Grows one depth-limited tree by least squares on the pseudo-responses,
// using histogram split search. Returns the tree and each node's sample range
// inside `idx`.
DecisionTree grow_structure(const BinnedFeatures& binned, std::span<const double> gradient,
                            std::vector<std::uint32_t>& idx, const BoostParams& params,
                            std::vector<NodeRange>& ranges) {
  DecisionTree tree;
  tree.nodes.emplace_back();
  ranges.assign(1, {0, 0, idx.size()});
  const auto min_leaf = static_cast<std::size_t>(params.min_leaf);
  std::vector<double> hist_sum;
  std::vector<std::size_t> hist_count;

  for (std::size_t r = 0; r < ranges.size(); ++r) {
    const NodeRange range = ranges[r];
    const std::size_t m = range.end - range.begin;
    if (tree.nodes[range.node].depth >= params.max_depth || m < 2 * min_leaf) continue;

    double total = 0.0;
    for (std::size_t pos = range.begin; pos < range.end; ++pos) total += gradient[idx[pos]];
    const double parent = total * total / static_cast<double>(m);

    int best_feature = -1;
    std::size_t best_bin = 0;
    double best_gain = 1e-12;
    for (std::size_t f = 0; f < binned.thresholds.size(); ++f) {
      const std::size_t nbins = binned.thresholds[f].size() + 1;
      if (nbins < 2) continue;
      hist_sum.assign(nbins, 0.0);
      hist_count.assign(nbins, 0);
      for (std::size_t pos = range.begin; pos < range.end; ++pos) {
        const std::uint32_t i = idx[pos];
        const std::uint16_t b = binned.bin(i, f);
        hist_sum[b] += gradient[i];
        ++hist_count[b];
      }
      double left_sum = 0.0;
      std::size_t left_count = 0;
      for (std::size_t b = 0; b + 1 < nbins; ++b) {
        left_sum += hist_sum[b];
        left_count += hist_count[b];
        if (left_count < min_leaf) continue;
        if (m - left_count < min_leaf) break;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                            right_sum * right_sum / static_cast<double>(m - left_count) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) continue;

    const auto f = static_cast<std::size_t>(best_feature);
    const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(range.begin),
                                    idx.begin() + static_cast<std::ptrdiff_t>(range.end),
                                    [&](std::uint32_t i) { return binned.bin(i, f) <= best_bin; });
    const auto split = static_cast<std::size_t>(mid - idx.begin());
    const std::size_t left_id = tree.nodes.size();
    TreeNode child;
    child.depth = tree.nodes[range.node].depth + 1;
    tree.nodes.push_back(child);
    tree.nodes.push_back(child);
    TreeNode& node = tree.nodes[range.node];
    node.feature = best_feature;
    node.threshold = binned.thresholds[f][best_bin];
    node.left = static_cast<std::int32_t>(left_id);
    node.right = static_cast<std::int32_t>(left_id + 1);
    ranges.push_back({left_id, range.begin, split});
    ranges.push_back({left_id + 1, split, range.end});
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const NodeRange& a, const NodeRange& b) { return a.node < b.node; });
  return tree;
}

BoostLevel fit_level(const FeatureMatrix& x, const BinnedFeatures& binned,
                     std::span<const double> y, double tau, const BoostParams& params,
                     std::uint64_t seed) {
  const std::size_t n = y.size();
  BoostLevel level;
  level.init = loss::empirical_quantile(y, tau);
  std::vector<double> fitted(n, level.init);
  level.loss_trace.push_back(mean_pinball(fitted, y, tau));

  const double base_delta = params.smoothing * spread(y);
  Rng rng(seed);
  std::vector<double> gradient(n);
  std::vector<double> residual(n);
  std::vector<std::uint32_t> idx;
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  std::vector<NodeRange> ranges;
  std::vector<double> buffer;
  std::size_t best_round = 0;
  double best_loss = level.loss_trace.front();

  for (int round = 0; round < params.rounds; ++round) {
    // Smoothing shrinks tenfold over the first half of the rounds.
    const double progress = static_cast<double>(round) / static_cast<double>(params.rounds);
    const double delta = base_delta * std::pow(10.0, std::max(0.0, 1.0 - 2.0 * progress));
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = y[i] - fitted[i];
      gradient[i] = loss::smooth_pinball_slope(residual[i], tau, delta);
    }
    if (params.subsample < 1.0) {
      idx = all;
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));
      idx.resize(keep);
      std::sort(idx.begin(), idx.end());
    } else {
      idx = all;
    }

    BoostTree tree;
    tree.tree = grow_structure(binned, gradient, idx, params, ranges);
    const std::size_t nodes = tree.tree.nodes.size();
    tree.value.assign(nodes, 0.0);
    tree.loss.assign(nodes, 0.0);
    tree.gain.assign(nodes, 0.0);
    std::vector<std::int64_t> parent_of(nodes, -1);
    for (std::size_t node = 0; node < nodes; ++node) {
      const TreeNode& t = tree.tree.nodes[node];
      if (t.is_leaf()) continue;
      parent_of[static_cast<std::size_t>(t.left)] = static_cast<std::int64_t>(node);
      parent_of[static_cast<std::size_t>(t.right)] = static_cast<std::int64_t>(node);
    }
    // Parents precede children in `ranges`. A child also tries its parent's
    // offset, so children never score worse than the parent split.
    std::vector<double> offset(nodes, 0.0);
    for (const NodeRange& range : ranges) {
      buffer.clear();
      for (std::size_t pos = range.begin; pos < range.end; ++pos) buffer.push_back(residual[idx[pos]]);
      auto fit = loss::minimize_constant(buffer, tau, delta);
      if (parent_of[range.node] >= 0) {
        const double inherited = offset[static_cast<std::size_t>(parent_of[range.node])];
        double at_parent = 0.0;
        for (double r : buffer) at_parent += loss::smooth_pinball(r - inherited, tau, delta);
        if (at_parent < fit.loss) fit = {inherited, at_parent};
      }
      offset[range.node] = fit.value;
      tree.loss[range.node] = fit.loss;
      if (tree.tree.nodes[range.node].is_leaf()) {
        tree.value[range.node] = params.learning_rate * fit.value;
      }
    }
    for (std::size_t node = 0; node < nodes; ++node) {
      const TreeNode& t = tree.tree.nodes[node];
      if (t.is_leaf()) continue;
      const double gain = tree.loss[node] - tree.loss[static_cast<std::size_t>(t.left)] -
                          tree.loss[static_cast<std::size_t>(t.right)];
      tree.gain[node] = std::max(0.0, gain);
    }

    for (std::size_t i = 0; i < n; ++i) {
      fitted[i] += tree.value[tree.tree.leaf_of(x, i)];
    }
    level.trees.push_back(std::move(tree));
    const double loss = mean_pinball(fitted, y, tau);
    level.loss_trace.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_round = level.trees.size();
    }
  }
  level.trees.resize(best_round);
  level.loss_trace.resize(best_round + 1);
  return level;
}

}  // namespace

GradientBoostModel::GradientBoostModel(LearnerSpec spec, QuantileLevelGrid levels,
                                       std::vector<std::string> feature_names,
                                       std::vector<BoostLevel> ensembles)
    : QuantileModel(std::move(spec), std::move(levels), std::move(feature_names)),
      ensembles_(std::move(ensembles)) {}

void GradientBoostModel::predict_rows(const FeatureMatrix& x, PredictionMatrix& out) const {
  for (std::size_t j = 0; j < ensembles_.size(); ++j) {
    const BoostLevel& level = ensembles_[j];
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = x.row(i);
      double z = level.init;
      for (const BoostTree& t : level.trees) z += t.value[t.tree.leaf_of(row)];
      out(i, j) = z;
    }
  }
}

std::shared_ptr<const GradientBoostModel> fit_gradient_boost(
    const LearnerSpec& spec, const FeatureMatrix& x, std::span<const double> y,
    const QuantileLevelGrid& levels, std::vector<std::string> feature_names) {
  const auto& params = std::get<BoostParams>(spec.params);
  const BinnedFeatures binned = bin_features(x, params.max_bins);
  std::vector<BoostLevel> ensembles(levels.size());
  const auto kind = static_cast<std::uint64_t>(spec.kind());
  parallel_for(levels.size(), [&](std::size_t j) {
    ensembles[j] = fit_level(x, binned, y, levels[j], params, derive_seed(spec.seed, kind, j));
  });
  return std::make_shared<GradientBoostModel>(spec, levels, std::move(feature_names),
                                              std::move(ensembles));
}

}  // namespace qstack
