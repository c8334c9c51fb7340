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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "qstack/config.hpp"
#include "qstack/ensemble.hpp"
#include "qstack/experiment.hpp"
#include "qstack/features.hpp"
#include "qstack/gradient_boost.hpp"
#include "qstack/importance.hpp"
#include "qstack/postprocess.hpp"
#include "qstack/scoring.hpp"
#include "qstack/synthetic.hpp"
#include "test_support.hpp"

namespace qstack {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome pinball_consistency() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 rng(2026);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> y(2000);
  for (double& v : y) v = e(rng);
  const double hi = *std::max_element(y.begin(), y.end());
  const auto steps = static_cast<int>(std::ceil(hi / 0.01));
  for (double tau : {0.1, 0.5, 0.9}) {
    double best = 0.0, best_loss = INFINITY;
    std::vector<double> z(y.size());
    for (int k = 0; k <= steps; ++k) {
      std::fill(z.begin(), z.end(), 0.01 * k);
      const double l = mean_pinball(z, y, tau);
      if (l < best_loss - 1e-12) {  // flat stretches: keep the smallest minimizer
        best_loss = l;
        best = 0.01 * k;
      }
    }
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const double q = sorted[static_cast<std::size_t>(std::ceil(tau * 2000.0)) - 1];
    out.check(std::abs(best - q) <= 0.01 + 1e-12, fmt::format("tau {}: grid {} vs quantile {}", tau, best, q));
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 1.0, fmt::format("took {:.2f} s", elapsed));
  if (out.pass) out.detail = fmt::format("{:.3f} s", elapsed);
  return out;
}

Outcome distance_weighting() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.01, 5.0), value(0.0, 300.0);
  double worst_sum = 0.0, worst_idw = 0.0;
  for (int n = 0; n < 1000; ++n) {
    GridNeighborhood g;
    for (int k = 0; k < 4; ++k) {
      g.distances[k] = dist(rng);
      g.values[k] = value(rng);
    }
    std::sort(g.distances.begin(), g.distances.end());
    const auto w = inverse_square_weights(g.distances);
    worst_sum = std::max(worst_sum, std::abs(w[0] + w[1] + w[2] + w[3] - 1.0));
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 4; ++k) {
      num += g.values[k] / (g.distances[k] * g.distances[k]);
      den += 1.0 / (g.distances[k] * g.distances[k]);
    }
    const auto f = distance_weight(g);
    const double total = f.values[0] + f.values[1] + f.values[2] + f.values[3];
    worst_idw = std::max(worst_idw, std::abs(total - num / den) / std::max(1.0, num / den));
  }
  out.check(worst_sum <= 1e-12, fmt::format("weight sum off by {:.3g}", worst_sum));
  out.check(worst_idw <= 1e-10, fmt::format("interpolant off by {:.3g}", worst_idw));
  GridNeighborhood hand;
  hand.distances = {1, 2, 2, 2};
  hand.values = {7, 0, 0, 0};
  const auto f = distance_weight(hand);
  out.check(f.values == std::array<double, 4>{4, 0, 0, 0},
            fmt::format("hand case gave ({}, {}, {}, {})", f.values[0], f.values[1], f.values[2], f.values[3]));
  if (out.pass) out.detail = fmt::format("max sum error {:.2g}, max interpolant error {:.2g}", worst_sum, worst_idw);
  return out;
}

Outcome stacking_equivalences() {
  Outcome out;
  const Dataset train = testing::heteroscedastic(1000, 2, 31);
  const Dataset test = testing::heteroscedastic(500, 2, 32);
  const auto levels = QuantileLevelGrid::full_default();
  const auto f1 = make_learner_spec("forest", LearnerKind::kQuantileForest, {{"trees", 50}}, 5);
  const auto f2 = make_learner_spec("forest_copy", LearnerKind::kQuantileForest, {{"trees", 50}}, 5);
  const auto lin = make_learner_spec("linear", LearnerKind::kLinearPinball, {}, 6);

  const auto single = fit_stack(EnsembleSpec{"k1", {f1}, CombinerSpec::mean(), 1}, train, levels);
  out.check(predict_stack(single, test) == fit(f1, train, levels)->predict(test),
            "k=1 mean differs from the retrained base");

  const auto dup = fit_stack(EnsembleSpec{"dup", {f1, f2}, CombinerSpec::mean(), 2}, train, levels);
  const auto dup_pred = predict_stack(dup, test);
  out.check(dup_pred == dup.full_base_models[0]->predict(test) &&
                dup_pred == dup.full_base_models[1]->predict(test),
            "duplicated bases with mean differ from a base");

  const auto best = fit_stack(EnsembleSpec{"best", {lin, f1}, CombinerSpec::best(), 3}, train, levels);
  const auto best_pred = predict_stack(best, test);
  bool identical = true;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const auto chosen = best.full_base_models[best.combiner.best_index[j]]->predict(test);
    identical = identical && chosen.column(j) == best_pred.column(j);
  }
  out.check(identical, "best combiner differs from its selected base");
  return out;
}

Outcome oracle_benchmark() {
  Outcome out;
  const auto start = Clock::now();
  ExperimentConfig config = default_config();
  config.data.kind = DataSource::Kind::kSynthetic;
  config.data.tabular = TabularParams{};
  config.data.tabular->samples = 15000;  // 10000 train, 5000 test
  config.levels = QuantileLevelGrid::ci_default();
  config.save_models = false;
  const ExperimentResult r = run_experiment(config, {.write_outputs = false});
  const auto& table = r.scores.table;
  out.check(r.test.size() == 5000, fmt::format("test set has {} samples", r.test.size()));

  std::vector<std::string> bases;
  for (const auto& b : config.bases) bases.push_back(b.name);
  std::string summary;
  for (std::size_t j = 0; j < config.levels.size(); ++j) {
    const double tau = config.levels[j];
    const auto& oracle = r.scores.oracle.at(j);
    const double floor = oracle.mean_score - 3.0 * oracle.standard_error;
    double best_base = INFINITY;
    for (const auto& row : table.rows) {
      if (row.level != tau) continue;
      out.check(row.mean_score >= floor, fmt::format("{} at {} scores {:.5f} below oracle floor {:.5f}",
                                                     row.algorithm, tau, row.mean_score, floor));
      if (std::find(bases.begin(), bases.end(), row.algorithm) != bases.end()) {
        best_base = std::min(best_base, row.mean_score);
        // Every base learner can represent the linear conditional quantiles
        // of this data, so all of them count as well specified.
        out.check(std::abs(row.coverage - tau) <= 0.05,
                  fmt::format("{} coverage {:.3f} at {}", row.algorithm, row.coverage, tau));
      }
    }
    const double stack = table.find("stack_linear", tau)->mean_score;
    out.check(stack <= 1.02 * best_base,
              fmt::format("stack_linear {:.5f} > 1.02 x best base {:.5f} at {}", stack, best_base, tau));
    summary += fmt::format("{}tau {}: stack/best {:.4f}", j ? ", " : "", tau, stack / best_base);
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 300.0, fmt::format("took {:.0f} s", elapsed));
  if (out.pass) out.detail = fmt::format("{}; {:.1f} s", summary, elapsed);
  return out;
}

Outcome postprocess_invariants() {
  Outcome out;
  std::mt19937_64 rng(99);
  const auto levels = QuantileLevelGrid::full_default();
  std::size_t rows = 0, bad_rows = 0;
  bool idempotent = true;
  for (int m = 0; m < 1000; ++m) {
    const auto raw = testing::random_predictions(levels, 20, rng, -50, 50);
    const auto p = postprocess(raw);
    const auto c = clamp_nonnegative(raw);
    const auto s = rearrange_noncrossing(raw);
    idempotent = idempotent && clamp_nonnegative(c) == c && rearrange_noncrossing(s) == s;
    for (std::size_t i = 0; i < p.rows(); ++i) {
      ++rows;
      bool ok = true;
      for (std::size_t j = 0; j < levels.size(); ++j) {
        ok = ok && p(i, j) >= 0.0 && (j == 0 || p(i, j - 1) <= p(i, j));
      }
      bad_rows += ok ? 0 : 1;
    }
  }
  out.check(bad_rows == 0, fmt::format("{} of {} rows invalid", bad_rows, rows));
  out.check(idempotent, "re-application changed a matrix");
  if (out.pass) out.detail = fmt::format("{} rows valid", rows);
  return out;
}

Outcome skill_identities() {
  Outcome out;
  const auto levels = QuantileLevelGrid::ci_default();
  const SyntheticData s = generate_tabular(TabularParams{.samples = 5000}, levels, 17);
  const auto y = s.data.targets();
  PredictionMatrix noisy = s.truth;
  std::mt19937_64 rng(18);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : noisy.values()) v += g(rng);
  const std::vector<NamedPredictions> algs = {{"noisy", noisy}, {"truth", s.truth}};
  const ScoreTable t = score_algorithms(algs, y, "noisy");
  for (double tau : levels.values()) {
    out.check(t.find("noisy", tau)->skill == 0.0, fmt::format("benchmark skill nonzero at {}", tau));
    out.check(t.find("truth", tau)->skill > 0.0, fmt::format("true quantiles skill not positive at {}", tau));
  }
  for (double v : {1e-12, 0.37, 5.0, 1e6}) out.check(skill_score(v, v) == 0.0, "skill of a score against itself");
  if (out.pass) {
    out.detail = fmt::format("true-quantile skill {:.3f} / {:.3f} / {:.3f}", t.find("truth", 0.1)->skill,
                             t.find("truth", 0.5)->skill, t.find("truth", 0.9)->skill);
  }
  return out;
}

Outcome importance_conservation() {
  Outcome out;
  const Dataset train = testing::heteroscedastic(2000, 4, 41);
  const auto levels = QuantileLevelGrid::ci_default();
  const auto boost = fit(make_learner_spec("boost", LearnerKind::kGradientBoostPinball, {{"rounds", 200}}, 1),
                         train, levels);
  double worst = 0.0;
  for (const auto& level : dynamic_cast<const GradientBoostModel&>(*boost).ensembles()) {
    for (const auto& t : level.trees) {
      double gains = 0.0, leaves = 0.0;
      for (std::size_t n = 0; n < t.tree.nodes.size(); ++n) {
        if (t.tree.nodes[n].is_leaf()) leaves += t.loss[n];
        else gains += t.gain[n];
      }
      worst = std::max(worst, std::abs(gains - (t.loss[0] - leaves)));
    }
  }
  out.check(worst <= 1e-9, fmt::format("telescoping off by {:.3g}", worst));

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0, 1);
  FeatureMatrix x(500, 5);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < 500; ++i) {
    for (std::size_t f = 0; f < 5; ++f) x(i, f) = u(rng);
    y[i] = 20.0 * x(i, 3) + 0.1 * u(rng);
  }
  const auto forest = fit(make_learner_spec("stumps", LearnerKind::kQuantileForest,
                                            {{"trees", 100}, {"max_depth", 1}, {"mtry", 5}}, 2),
                          x, y, levels);
  const auto stat = split_frequency_importance(*forest);
  out.check(stat == std::vector<double>{0, 0, 0, 1, 0}, "forced forest importance is not 1 for its feature");
  if (out.pass) out.detail = fmt::format("max telescoping error {:.2g}", worst);
  return out;
}

Outcome determinism() {
  Outcome out;
  testing::TempDir dir;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto target = dir / ("run" + std::to_string(run));
    const std::string cmd = fmt::format("\"{}\" run --config \"{}\" --out \"{}\" --quiet > /dev/null", QSTACK_CLI,
                                        QSTACK_CI_CONFIG, target.string());
    const int status = std::system(cmd.c_str());
    out.check(status == 0, fmt::format("run {} exited with status {}", run + 1, status));
    const std::string scores = testing::read_text(target / "scores.csv");
    out.check(!scores.empty(), fmt::format("run {} wrote no scores.csv", run + 1));
    if (run == 0) first = scores;
    else out.check(scores == first, "scores.csv differs between runs");
  }
  if (out.pass) out.detail = fmt::format("{} bytes identical", first.size());
  return out;
}

}  // namespace
}  // namespace qstack

int main() {
  using qstack::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"pinball consistency", qstack::pinball_consistency},
      {"distance weighting", qstack::distance_weighting},
      {"stacking equivalences", qstack::stacking_equivalences},
      {"oracle benchmark", qstack::oracle_benchmark},
      {"post-processing invariants", qstack::postprocess_invariants},
      {"skill identities", qstack::skill_identities},
      {"importance conservation", qstack::importance_conservation},
      {"determinism", qstack::determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} criterion {} ({}){}{}\n", o.pass ? "PASS" : "FAIL", index, name,
               o.detail.empty() ? "" : ": ", o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
