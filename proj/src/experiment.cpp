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

#include "qstack/experiment.hpp"

#include <fstream>
#include <stdexcept>
#include <utility>

#include <fmt/core.h>

#include "json.hpp"
#include "qstack/ensemble.hpp"
#include "qstack/features.hpp"
#include "qstack/parallel.hpp"
#include "qstack/postprocess.hpp"
#include "qstack/random.hpp"
#include "qstack/synthetic.hpp"

namespace qstack {
namespace {

template <typename F>
auto stage(std::string_view name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("stage {}: {}", name, e.what()));
  }
}

std::vector<std::size_t> ids_of(const Dataset& d) { return {d.row_ids().begin(), d.row_ids().end()}; }

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  const DataSource& source = config.data;
  ExperimentData out;
  switch (source.kind) {
    case DataSource::Kind::kSynthetic: {
      SyntheticData s = source.tabular ? generate_tabular(*source.tabular, config.levels, config.seeds.data)
                                       : generate_spatial(*source.spatial, config.levels, config.seeds.data);
      out.data = std::move(s.data);
      out.truth = std::move(s.truth);
      return out;
    }
    case DataSource::Kind::kCsv: {
      LoadResult loaded = load_csv(source.csv, source.schema);
      out.data = std::move(loaded.dataset);
      out.dropped = loaded.report.dropped;
      out.rejected = loaded.report.rejected.size();
      break;
    }
    case DataSource::Kind::kSpatial: {
      const auto sites = read_sites_csv(source.sites);
      std::vector<SatelliteProduct> products;
      for (const auto& [name, path] : source.products) products.push_back({name, read_grid_csv(path)});
      AssemblyResult assembled = assemble_samples(sites, products);
      out.data = std::move(assembled.dataset);
      out.dropped = assembled.skipped;
      break;
    }
  }
  if (source.truth) out.truth = read_quantile_csv(*source.truth, out.data, config.levels);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  const ExperimentData data = stage("load_data", [&] { return load_experiment_data(config); });
  return run_experiment(config, data, options);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& input,
                                const ExperimentOptions& options) {
  auto log = [&](const std::string& message) {
    if (options.log) options.log(message);
  };
  stage("validate_config", [&] {
    validate(config);
    return 0;
  });
  if (config.threads > 0) set_thread_count(config.threads);

  const QuantileLevelGrid& levels = config.levels;
  const std::vector<LearnerSpec> bases = stage("validate_config", [&] { return base_specs(config); });
  const std::vector<CombinerSpec> combiners = stage("validate_config", [&] { return combiner_specs(config); });
  const std::size_t k = bases.size();
  std::vector<std::string> base_names;
  for (const auto& b : bases) base_names.push_back(b.name);

  ExperimentResult result;
  result.split = stage("split", [&] {
    if (input.data.size() < 6) throw std::invalid_argument("need at least 6 samples, got " + std::to_string(input.data.size()));
    return split_three_way(input.data, config.seeds.split);
  });
  const Dataset set1 = input.data.subset(result.split.parts[0]);
  const Dataset set2 = input.data.subset(result.split.parts[1]);
  const std::vector<std::size_t> train_positions = merge_parts(result.split, std::vector<std::size_t>{0, 1});
  const Dataset train = input.data.subset(train_positions);
  result.test = input.data.subset(result.split.parts[2]);
  if (input.truth) {
    PredictionMatrix t(levels, result.test.size());
    for (std::size_t i = 0; i < result.test.size(); ++i) {
      const auto row = input.truth->row(result.split.parts[2][i]);
      std::copy(row.begin(), row.end(), t.row(i).begin());
    }
    result.test_truth = std::move(t);
  }
  log(fmt::format("split: {} / {} / {} samples", set1.size(), set2.size(), result.test.size()));

  auto fit_bases = [&](const Dataset& data, const std::string& stage_name) {
    std::vector<TrainedModel> models(k);
    parallel_for(k, [&](std::size_t b) {
      try {
        models[b] = fit(bases[b], data, levels);
      } catch (const std::exception& e) {
        throw std::runtime_error("base learner '" + bases[b].name + "': " + e.what());
      }
    });
    for (const auto& b : bases) result.fit_audit.push_back({stage_name, b.name, ids_of(data)});
    return models;
  };

  const auto set1_models = stage("fit_set1", [&] { return fit_bases(set1, "fit_set1"); });
  log("fitted bases on set 1");
  const auto set2_predictions = stage("predict_set2", [&] {
    std::vector<PredictionMatrix> p(k);
    for (std::size_t b = 0; b < k; ++b) p[b] = set1_models[b]->predict(set2);
    return p;
  });

  const std::vector<double> set2_targets = set2.targets();
  std::vector<FittedCombiner> fitted(combiners.size());
  stage("fit_combiners", [&] {
    for (std::size_t c = 0; c < combiners.size(); ++c) {
      try {
        fitted[c] = fit_combiner(combiners[c], set2_predictions, set2_targets, levels,
                                 derive_seed(config.seeds.ensemble, c));
      } catch (const std::exception& e) {
        throw std::runtime_error("combiner '" + combiners[c].name + "': " + e.what());
      }
      if (combiners[c].rule == CombinerRule::kLearner) {
        result.fit_audit.push_back({"fit_combiners", combiners[c].name, ids_of(set2)});
      }
    }
    return 0;
  });
  log("fitted combiners on set 2");

  const auto full_models = stage("refit_full", [&] { return fit_bases(train, "refit_full"); });
  log("refit bases on sets 1 and 2");

  std::vector<StackedModel> stacks(combiners.size());
  for (std::size_t c = 0; c < combiners.size(); ++c) {
    stacks[c] = {combiners[c].name, levels, input.data.feature_names(), base_names, full_models, fitted[c]};
  }

  stage("predict_test", [&] {
    std::vector<PredictionMatrix> base_test(k);
    for (std::size_t b = 0; b < k; ++b) base_test[b] = full_models[b]->predict(result.test);
    for (std::size_t b = 0; b < k; ++b) result.test_predictions.push_back({bases[b].name, base_test[b]});
    for (std::size_t c = 0; c < combiners.size(); ++c) {
      result.test_predictions.push_back({combiners[c].name, combine(fitted[c], base_test)});
    }
    for (auto& p : result.test_predictions) p.predictions = postprocess(std::move(p.predictions));
    return 0;
  });

  stage("score", [&] {
    const std::vector<double> y = result.test.targets();
    result.scores.table = score_algorithms(result.test_predictions, y, config.benchmark);
    if (result.test_truth) result.scores.oracle = reference_scores(*result.test_truth, y);
    result.scores.metadata = {kVersion, config_hash(config), config.seeds.split, config.seeds.ensemble,
                              config.seeds.learners, config.seeds.data};
    return 0;
  });

  stage("importance", [&] {
    for (const auto& m : full_models) append(result.importance, model_importance(*m, ImportanceSetting::kRawFeatures));
    for (const auto& s : stacks) append(result.importance, combiner_importance(s));
    return 0;
  });

  if (!options.write_outputs) return result;

  stage("report", [&] {
    namespace fs = std::filesystem;
    const fs::path dir = config.output;
    fs::create_directories(dir);
    write_scores_csv(result.scores, dir / "scores.csv");
    write_scores_json(result.scores, dir / "scores.json");
    write_importance_csv(result.importance, dir / "importance.csv");
    result.outputs = {dir / "scores.csv", dir / "scores.json", dir / "importance.csv"};
    nlohmann::json models = nlohmann::json::array();
    if (config.save_models) {
      const fs::path model_dir = dir / "models";
      for (std::size_t c = 0; c < stacks.size(); ++c) {
        const fs::path manifest = save_stack(stacks[c], model_dir, c == 0);
        models.push_back(fs::relative(manifest, dir).generic_string());
      }
      if (stacks.empty()) {
        fs::create_directories(model_dir);
        for (std::size_t b = 0; b < k; ++b) save_model(*full_models[b], model_dir / (bases[b].name + ".qsm"));
      }
      for (std::size_t b = 0; b < k; ++b) models.push_back("models/" + bases[b].name + ".qsm");
    }
    const nlohmann::json manifest = {
        {"version", kVersion},
        {"config_hash", result.scores.metadata.config_hash},
        {"config", nlohmann::json::parse(canonical_json(config))},
        {"samples",
         {{"total", input.data.size()},
          {"dropped", input.dropped},
          {"rejected", input.rejected},
          {"set1", set1.size()},
          {"set2", set2.size()},
          {"set3", result.test.size()}}},
        {"algorithms", algorithm_names(config)},
        {"outputs", {"scores.csv", "scores.json", "importance.csv"}},
        {"models", models},
    };
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
    result.outputs.push_back(dir / "manifest.json");
    return 0;
  });
  log("wrote reports to " + config.output.string());
  return result;
}

}  // namespace qstack
