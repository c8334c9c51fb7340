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

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "qstack/config.hpp"
#include "qstack/csv.hpp"
#include "qstack/dataset.hpp"
#include "qstack/ensemble.hpp"
#include "qstack/experiment.hpp"
#include "qstack/features.hpp"
#include "qstack/importance.hpp"
#include "qstack/learners.hpp"
#include "qstack/postprocess.hpp"
#include "qstack/report.hpp"
#include "qstack/scoring.hpp"
#include "qstack/synthetic.hpp"

namespace fs = std::filesystem;
using namespace qstack;

namespace {

std::pair<std::string, std::string> split_pair(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument(fmt::format("{} must look like name=value, got '{}'", what, text));
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

Hyperparameters parse_params(const std::vector<std::string>& items) {
  Hyperparameters out;
  for (const auto& item : items) {
    const auto [key, value] = split_pair(item, "--param");
    const auto v = csv::parse_double(value);
    if (!v) throw std::invalid_argument("--param " + key + " needs a number");
    out[key] = *v;
  }
  return out;
}

// Config with command-line overrides applied.
ExperimentConfig effective_config(const std::string& config_path, std::optional<std::uint64_t> seed,
                                  const std::string& levels, const std::string& out) {
  ExperimentConfig config = config_path.empty() ? default_config() : load_config(config_path);
  if (seed) config.seeds = {*seed, *seed, *seed, *seed};
  if (!levels.empty()) config.levels = QuantileLevelGrid::parse(levels);
  if (!out.empty()) config.output = out;
  validate(config);
  return config;
}

Dataset read_dataset(const std::string& path) {
  LoadResult loaded = load_csv(path);
  for (const auto& issue : loaded.report.rejected) {
    fmt::print(stderr, "{}:{}: rejected: {}\n", path, issue.line, issue.reason);
  }
  if (loaded.report.dropped > 0) fmt::print(stderr, "{}: dropped {} incomplete rows\n", path, loaded.report.dropped);
  return std::move(loaded.dataset);
}

bool is_stack_manifest(const fs::path& path) { return path.extension() == ".json"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked quantile regression: base learners, combiners and evaluation"};
  app.require_subcommand(1);

  // generate
  std::string gen_config, gen_out = "synthetic", gen_levels;
  std::optional<std::uint64_t> gen_seed;
  auto* generate = app.add_subcommand("generate", "Write synthetic data with known conditional quantiles");
  generate->add_option("--config", gen_config, "Experiment config whose synthetic data section is used");
  generate->add_option("--seed", gen_seed, "Data seed");
  generate->add_option("--levels", gen_levels, "full, ci or a comma separated list");
  generate->add_option("--out", gen_out, "Output directory");

  // features
  std::string feat_sites, feat_out;
  std::vector<std::string> feat_products;
  auto* features = app.add_subcommand("features", "Assemble distance-weighted predictors from gauge and grid files");
  features->add_option("--sites", feat_sites, "Gauge CSV")->required();
  features->add_option("--product", feat_products, "name=grid.csv, in predictor order")->required();
  features->add_option("--out", feat_out, "Dataset CSV")->required();

  // train
  std::string train_data, train_kind, train_name, train_levels = "full", train_out;
  std::vector<std::string> train_params;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "Fit one learner on a dataset CSV");
  train->add_option("--data", train_data, "Dataset CSV")->required();
  train->add_option("--kind", train_kind, "linear_pinball, quantile_forest, gradient_boost_pinball or neural_pinball")
      ->required();
  train->add_option("--name", train_name, "Model name (default: the kind)");
  train->add_option("--param", train_params, "Hyperparameter override key=value");
  train->add_option("--seed", train_seed, "Learner seed");
  train->add_option("--levels", train_levels, "full, ci or a comma separated list");
  train->add_option("--out", train_out, "Model artifact")->required();

  // predict
  std::string pred_model, pred_data, pred_out;
  bool pred_raw = false;
  auto* predict_cmd = app.add_subcommand("predict", "Predict quantiles with a model artifact or stack manifest");
  predict_cmd->add_option("--model", pred_model, "Model artifact (.qsm) or stack manifest (.json)")->required();
  predict_cmd->add_option("--data", pred_data, "Dataset CSV")->required();
  predict_cmd->add_option("--out", pred_out, "Prediction CSV")->required();
  predict_cmd->add_flag("--raw", pred_raw, "Skip clamping and non-crossing repair");

  // evaluate
  std::string eval_data, eval_benchmark, eval_out;
  std::vector<std::string> eval_preds;
  auto* evaluate = app.add_subcommand("evaluate", "Score prediction files against observed targets");
  evaluate->add_option("--data", eval_data, "Dataset CSV with targets")->required();
  evaluate->add_option("--pred", eval_preds, "name=predictions.csv")->required();
  evaluate->add_option("--benchmark", eval_benchmark, "Benchmark algorithm name (default: the first)");
  evaluate->add_option("--out", eval_out, "scores.csv (default: stdout)");

  // importance
  std::string imp_model, imp_out;
  auto* importance = app.add_subcommand("importance", "Predictor importance of a forest or boosting model");
  importance->add_option("--model", imp_model, "Model artifact (.qsm) or stack manifest (.json)")->required();
  importance->add_option("--out", imp_out, "importance.csv")->required();

  // run
  std::string run_config, run_levels, run_out;
  std::optional<std::uint64_t> run_seed;
  bool run_quiet = false;
  auto* run = app.add_subcommand("run", "Full protocol: split, stack, predict, score, importance, reports");
  run->add_option("--config", run_config, "Experiment config (YAML)");
  run->add_option("--seed", run_seed, "Sets every seed");
  run->add_option("--levels", run_levels, "full, ci or a comma separated list");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--quiet", run_quiet, "No progress messages");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      ExperimentConfig config = effective_config(gen_config, std::nullopt, gen_levels, "");
      if (gen_seed) config.seeds.data = *gen_seed;
      if (config.data.kind != DataSource::Kind::kSynthetic) {
        throw std::invalid_argument("config data source is not synthetic");
      }
      const SyntheticData data = config.data.tabular
                                     ? generate_tabular(*config.data.tabular, config.levels, config.seeds.data)
                                     : generate_spatial(*config.data.spatial, config.levels, config.seeds.data);
      write_synthetic(data, gen_out);
      fmt::print("wrote {} samples to {}\n", data.data.size(), gen_out);
    } else if (*features) {
      const auto sites = read_sites_csv(feat_sites);
      std::vector<SatelliteProduct> products;
      for (const auto& item : feat_products) {
        const auto [name, path] = split_pair(item, "--product");
        products.push_back({name, read_grid_csv(path)});
      }
      const AssemblyResult result = assemble_samples(sites, products);
      for (const auto& issue : result.issues) fmt::print(stderr, "skipped: {}\n", issue);
      write_csv(result.dataset, feat_out);
      fmt::print("wrote {} samples ({} skipped) to {}\n", result.dataset.size(), result.skipped, feat_out);
    } else if (*train) {
      const Dataset data = read_dataset(train_data);
      const LearnerKind kind = parse_kind(train_kind);
      const LearnerSpec spec = make_learner_spec(train_name.empty() ? train_kind : train_name, kind,
                                                 parse_params(train_params), train_seed);
      const TrainedModel model = fit(spec, data, QuantileLevelGrid::parse(train_levels));
      save_model(*model, train_out);
      fmt::print("trained {} on {} samples, wrote {}\n", spec.name, data.size(), train_out);
    } else if (*predict_cmd) {
      const Dataset data = read_dataset(pred_data);
      PredictionMatrix p = is_stack_manifest(pred_model) ? predict_stack(load_stack(pred_model), data)
                                                         : load_model(pred_model)->predict(data);
      if (!pred_raw) p = postprocess(std::move(p));
      write_quantile_csv(data, p, pred_out);
      fmt::print("wrote {} rows to {}\n", p.rows(), pred_out);
    } else if (*evaluate) {
      const Dataset data = read_dataset(eval_data);
      std::vector<NamedPredictions> algorithms;
      std::optional<QuantileLevelGrid> levels;
      for (const auto& item : eval_preds) {
        const auto [name, path] = split_pair(item, "--pred");
        // Level columns are taken from the header of the first file.
        if (!levels) {
          const csv::Table t = csv::read_file(path);
          std::vector<double> values;
          for (const auto& h : t.header) {
            if (h == "station_id" || h == "time_index") continue;
            const auto v = csv::parse_double(h);
            if (!v) throw std::runtime_error(path + ": unexpected column '" + h + "'");
            values.push_back(*v);
          }
          levels = QuantileLevelGrid(values);
        }
        algorithms.push_back({name, read_quantile_csv(path, data, *levels)});
      }
      const std::string benchmark = eval_benchmark.empty() ? algorithms.front().name : eval_benchmark;
      ScoreReport report;
      report.table = score_algorithms(algorithms, data.targets(), benchmark);
      if (eval_out.empty()) {
        write_scores_csv(report, std::cout);
      } else {
        write_scores_csv(report, eval_out);
      }
    } else if (*importance) {
      ImportanceReport report;
      if (is_stack_manifest(imp_model)) {
        const StackedModel stack = load_stack(imp_model);
        for (const auto& m : stack.full_base_models) {
          append(report, model_importance(*m, ImportanceSetting::kRawFeatures));
        }
        append(report, combiner_importance(stack));
      } else {
        const TrainedModel model = load_model(imp_model);
        if (model->kind() != LearnerKind::kQuantileForest && model->kind() != LearnerKind::kGradientBoostPinball) {
          throw std::invalid_argument("importance needs a quantile_forest or gradient_boost_pinball model");
        }
        report = model_importance(*model, ImportanceSetting::kRawFeatures);
      }
      write_importance_csv(report, imp_out);
      fmt::print("wrote {} rows to {}\n", report.rows.size(), imp_out);
    } else if (*run) {
      const ExperimentConfig config = effective_config(run_config, run_seed, run_levels, run_out);
      ExperimentOptions options;
      if (!run_quiet) options.log = [](std::string_view m) { fmt::print(stderr, "{}\n", m); };
      const ExperimentResult result = run_experiment(config, options);
      for (const auto& path : result.outputs) fmt::print("{}\n", path.string());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
