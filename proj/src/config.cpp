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

#include "qstack/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "qstack/random.hpp"

namespace qstack {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::runtime_error("config: " + key + ": " + what);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(key, "invalid value");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* name, T& out, const std::string& prefix) {
  const YAML::Node node = parent[name];
  if (node) out = scalar<T>(node, prefix + name);
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!node.IsMap()) fail(prefix.empty() ? "<root>" : prefix, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(prefix + key, "unknown key");
  }
}

Hyperparameters read_params(const YAML::Node& node, const std::string& prefix) {
  Hyperparameters out;
  if (!node) return out;
  if (!node.IsMap()) fail(prefix, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (kv.second.IsScalar() && (kv.second.Scalar() == "true" || kv.second.Scalar() == "false")) {
      out[key] = kv.second.Scalar() == "true" ? 1.0 : 0.0;
    } else {
      out[key] = scalar<double>(kv.second, prefix + "." + key);
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

TabularParams read_tabular(const YAML::Node& n, const std::string& k) {
  TabularParams p;
  check_keys(n, {"mode", "samples", "features", "intercept", "slope", "sigma0", "sigma1", "noise_scale", "noise"}, k);
  read(n, "samples", p.samples, k);
  read(n, "features", p.features, k);
  read(n, "intercept", p.intercept, k);
  read(n, "slope", p.slope, k);
  read(n, "sigma0", p.sigma0, k);
  read(n, "sigma1", p.sigma1, k);
  read(n, "noise_scale", p.noise_scale, k);
  if (n["noise"]) p.noise = parse_noise(scalar<std::string>(n["noise"], k + "noise"));
  return p;
}

SpatialParams read_spatial(const YAML::Node& n, const std::string& k) {
  SpatialParams p;
  check_keys(n, {"mode", "width", "height", "spacing", "stations", "months", "product_noise", "weight_a",
                 "weight_b", "elevation_effect", "sigma0", "sigma1", "noise_scale", "missing_fraction", "noise"},
             k);
  read(n, "width", p.width, k);
  read(n, "height", p.height, k);
  read(n, "spacing", p.spacing, k);
  read(n, "stations", p.stations, k);
  read(n, "months", p.months, k);
  read(n, "product_noise", p.product_noise, k);
  read(n, "weight_a", p.weight_a, k);
  read(n, "weight_b", p.weight_b, k);
  read(n, "elevation_effect", p.elevation_effect, k);
  read(n, "sigma0", p.sigma0, k);
  read(n, "sigma1", p.sigma1, k);
  read(n, "noise_scale", p.noise_scale, k);
  read(n, "missing_fraction", p.missing_fraction, k);
  if (n["noise"]) p.noise = parse_noise(scalar<std::string>(n["noise"], k + "noise"));
  return p;
}

DataSource read_data(const YAML::Node& n, const std::filesystem::path& base) {
  DataSource d;
  check_keys(n, {"source", "synthetic", "csv", "target", "features", "sites", "products", "truth"}, "data.");
  const auto source = n["source"] ? scalar<std::string>(n["source"], "data.source") : "synthetic";
  if (n["truth"]) d.truth = resolve(base, scalar<std::string>(n["truth"], "data.truth"));
  if (source == "synthetic") {
    d.kind = DataSource::Kind::kSynthetic;
    const YAML::Node s = n["synthetic"];
    const std::string mode = s && s["mode"] ? scalar<std::string>(s["mode"], "data.synthetic.mode") : "tabular";
    if (mode == "tabular") {
      d.tabular = s ? read_tabular(s, "data.synthetic.") : TabularParams{};
    } else if (mode == "spatial") {
      d.spatial = s ? read_spatial(s, "data.synthetic.") : SpatialParams{};
    } else {
      fail("data.synthetic.mode", "expected tabular or spatial");
    }
  } else if (source == "csv") {
    d.kind = DataSource::Kind::kCsv;
    if (!n["csv"]) fail("data.csv", "required for source csv");
    d.csv = resolve(base, scalar<std::string>(n["csv"], "data.csv"));
    read(n, "target", d.schema.target, "data.");
    if (n["features"]) d.schema.features = scalar<std::vector<std::string>>(n["features"], "data.features");
  } else if (source == "spatial") {
    d.kind = DataSource::Kind::kSpatial;
    if (!n["sites"]) fail("data.sites", "required for source spatial");
    d.sites = resolve(base, scalar<std::string>(n["sites"], "data.sites"));
    const YAML::Node products = n["products"];
    if (!products || !products.IsSequence() || products.size() == 0) {
      fail("data.products", "expected a non-empty list");
    }
    for (std::size_t i = 0; i < products.size(); ++i) {
      const std::string k = "data.products[" + std::to_string(i) + "].";
      check_keys(products[i], {"name", "path"}, k);
      if (!products[i]["name"] || !products[i]["path"]) fail(k + "name", "name and path are required");
      d.products.emplace_back(scalar<std::string>(products[i]["name"], k + "name"),
                              resolve(base, scalar<std::string>(products[i]["path"], k + "path")));
    }
  } else {
    fail("data.source", "expected synthetic, csv or spatial");
  }
  return d;
}

json params_json(const Hyperparameters& h) {
  json out = json::object();
  for (const auto& [k, v] : h) out[k] = v;
  return out;
}

json tabular_json(const TabularParams& p) {
  return {{"mode", "tabular"},     {"samples", p.samples}, {"features", p.features},
          {"intercept", p.intercept}, {"slope", p.slope},   {"sigma0", p.sigma0},
          {"sigma1", p.sigma1},    {"noise_scale", p.noise_scale},
          {"noise", std::string(noise_name(p.noise))}};
}

json spatial_json(const SpatialParams& p) {
  return {{"mode", "spatial"},
          {"width", p.width},
          {"height", p.height},
          {"spacing", p.spacing},
          {"stations", p.stations},
          {"months", p.months},
          {"product_noise", p.product_noise},
          {"weight_a", p.weight_a},
          {"weight_b", p.weight_b},
          {"elevation_effect", p.elevation_effect},
          {"sigma0", p.sigma0},
          {"sigma1", p.sigma1},
          {"noise_scale", p.noise_scale},
          {"missing_fraction", p.missing_fraction},
          {"noise", std::string(noise_name(p.noise))}};
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.data.kind = DataSource::Kind::kSynthetic;
  c.data.tabular = TabularParams{};
  c.bases = {{"linear", LearnerKind::kLinearPinball, {}},
             {"forest", LearnerKind::kQuantileForest, {}},
             {"boost", LearnerKind::kGradientBoostPinball, {}},
             {"neural", LearnerKind::kNeuralPinball, {}}};
  c.combiners = {{"stack_linear", CombinerRule::kLearner, LearnerKind::kLinearPinball, {}},
                 {"stack_forest", CombinerRule::kLearner, LearnerKind::kQuantileForest, {}},
                 {"stack_boost", CombinerRule::kLearner, LearnerKind::kGradientBoostPinball, {}},
                 {"stack_neural", CombinerRule::kLearner, LearnerKind::kNeuralPinball, {}},
                 {"mean", CombinerRule::kMean, {}, {}},
                 {"median", CombinerRule::kMedian, {}, {}},
                 {"best", CombinerRule::kBest, {}, {}}};
  return c;
}

ExperimentConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw std::runtime_error(std::string("config: not valid YAML: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, {"data", "levels", "bases", "combiners", "benchmark", "seeds", "output", "threads", "save_models"},
             "");
  ExperimentConfig c = default_config();
  if (root["data"]) c.data = read_data(root["data"], base_dir);
  if (const YAML::Node levels = root["levels"]) {
    try {
      if (levels.IsSequence()) {
        c.levels = QuantileLevelGrid(levels.as<std::vector<double>>());
      } else {
        c.levels = QuantileLevelGrid::parse(levels.as<std::string>());
      }
    } catch (const std::exception& e) {
      fail("levels", e.what());
    }
  }
  if (const YAML::Node bases = root["bases"]) {
    if (!bases.IsSequence()) fail("bases", "expected a list");
    c.bases.clear();
    for (std::size_t i = 0; i < bases.size(); ++i) {
      const std::string k = "bases[" + std::to_string(i) + "].";
      check_keys(bases[i], {"name", "kind", "params"}, k);
      if (!bases[i]["name"] || !bases[i]["kind"]) fail(k + "name", "name and kind are required");
      BaseEntry b;
      b.name = scalar<std::string>(bases[i]["name"], k + "name");
      try {
        b.kind = parse_kind(scalar<std::string>(bases[i]["kind"], k + "kind"));
      } catch (const std::invalid_argument& e) {
        fail(k + "kind", e.what());
      }
      b.params = read_params(bases[i]["params"], k + "params");
      c.bases.push_back(std::move(b));
    }
  }
  if (const YAML::Node combiners = root["combiners"]) {
    if (!combiners.IsSequence()) fail("combiners", "expected a list");
    c.combiners.clear();
    for (std::size_t i = 0; i < combiners.size(); ++i) {
      const std::string k = "combiners[" + std::to_string(i) + "].";
      check_keys(combiners[i], {"name", "rule", "kind", "params"}, k);
      if (!combiners[i]["name"] || !combiners[i]["rule"]) fail(k + "name", "name and rule are required");
      CombinerEntry e;
      e.name = scalar<std::string>(combiners[i]["name"], k + "name");
      try {
        e.rule = parse_rule(scalar<std::string>(combiners[i]["rule"], k + "rule"));
        if (e.rule == CombinerRule::kLearner) {
          if (!combiners[i]["kind"]) fail(k + "kind", "required for rule learner");
          e.kind = parse_kind(scalar<std::string>(combiners[i]["kind"], k + "kind"));
        } else if (combiners[i]["kind"] || combiners[i]["params"]) {
          fail(k + "kind", "only allowed for rule learner");
        }
      } catch (const std::invalid_argument& ex) {
        fail(k + "rule", ex.what());
      }
      e.params = read_params(combiners[i]["params"], k + "params");
      c.combiners.push_back(std::move(e));
    }
  }
  read(root, "benchmark", c.benchmark, "");
  if (const YAML::Node seeds = root["seeds"]) {
    check_keys(seeds, {"split", "ensemble", "learners", "data"}, "seeds.");
    read(seeds, "split", c.seeds.split, "seeds.");
    read(seeds, "ensemble", c.seeds.ensemble, "seeds.");
    read(seeds, "learners", c.seeds.learners, "seeds.");
    read(seeds, "data", c.seeds.data, "seeds.");
  }
  if (root["output"]) c.output = scalar<std::string>(root["output"], "output");
  read(root, "threads", c.threads, "");
  read(root, "save_models", c.save_models, "");
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

void validate(const ExperimentConfig& config) {
  if (config.levels.empty()) throw std::invalid_argument("no quantile levels");
  if (config.bases.empty()) throw std::invalid_argument("at least one base learner is required");
  const auto names = algorithm_names(config);
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("algorithm names must not be empty");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate algorithm name '" + n + "'");
  }
  if (!seen.count(config.benchmark)) {
    throw std::invalid_argument("benchmark '" + config.benchmark + "' is not an evaluated algorithm");
  }
  base_specs(config);
  combiner_specs(config);
  const DataSource& d = config.data;
  if (d.kind == DataSource::Kind::kSynthetic) {
    if (d.tabular.has_value() == d.spatial.has_value()) {
      throw std::invalid_argument("synthetic data needs exactly one of tabular or spatial parameters");
    }
    if (d.tabular) validate(*d.tabular);
    if (d.spatial) validate(*d.spatial);
  }
}

std::vector<std::string> algorithm_names(const ExperimentConfig& config) {
  std::vector<std::string> out;
  for (const auto& b : config.bases) out.push_back(b.name);
  for (const auto& c : config.combiners) out.push_back(c.name);
  return out;
}

std::vector<LearnerSpec> base_specs(const ExperimentConfig& config) {
  std::vector<LearnerSpec> out;
  for (std::size_t i = 0; i < config.bases.size(); ++i) {
    const BaseEntry& b = config.bases[i];
    out.push_back(make_learner_spec(b.name, b.kind, b.params,
                                    derive_seed(config.seeds.learners, stream::kLearnerLevel, i)));
  }
  return out;
}

std::vector<CombinerSpec> combiner_specs(const ExperimentConfig& config) {
  std::vector<CombinerSpec> out;
  for (const CombinerEntry& c : config.combiners) {
    switch (c.rule) {
      case CombinerRule::kMean: out.push_back(CombinerSpec::mean(c.name)); break;
      case CombinerRule::kMedian: out.push_back(CombinerSpec::median(c.name)); break;
      case CombinerRule::kBest: out.push_back(CombinerSpec::best(c.name)); break;
      case CombinerRule::kLearner:
        out.push_back(CombinerSpec::learner_based(c.name, make_learner_spec(c.name, c.kind, c.params)));
        break;
    }
  }
  return out;
}

std::string canonical_json(const ExperimentConfig& config) {
  const DataSource& d = config.data;
  json data;
  switch (d.kind) {
    case DataSource::Kind::kSynthetic:
      data = {{"source", "synthetic"},
              {"synthetic", d.tabular ? tabular_json(*d.tabular) : spatial_json(*d.spatial)}};
      break;
    case DataSource::Kind::kCsv:
      data = {{"source", "csv"},
              {"csv", d.csv.generic_string()},
              {"target", d.schema.target},
              {"features", d.schema.features}};
      break;
    case DataSource::Kind::kSpatial: {
      json products = json::array();
      for (const auto& [name, path] : d.products) products.push_back({{"name", name}, {"path", path.generic_string()}});
      data = {{"source", "spatial"}, {"sites", d.sites.generic_string()}, {"products", products}};
      break;
    }
  }
  if (d.truth) data["truth"] = d.truth->generic_string();
  json bases = json::array();
  for (const auto& spec : base_specs(config)) {
    bases.push_back({{"name", spec.name},
                     {"kind", std::string(kind_name(spec.kind()))},
                     {"params", params_json(hyperparameters(spec))}});
  }
  json combiners = json::array();
  for (const auto& spec : combiner_specs(config)) {
    json c = {{"name", spec.name}, {"rule", std::string(rule_name(spec.rule))}};
    if (spec.learner) {
      c["kind"] = std::string(kind_name(spec.learner->kind()));
      c["params"] = params_json(hyperparameters(*spec.learner));
    }
    combiners.push_back(c);
  }
  const json doc = {
      {"data", data},
      {"levels", std::vector<double>(config.levels.values().begin(), config.levels.values().end())},
      {"bases", bases},
      {"combiners", combiners},
      {"benchmark", config.benchmark},
      {"seeds",
       {{"split", config.seeds.split},
        {"ensemble", config.seeds.ensemble},
        {"learners", config.seeds.learners},
        {"data", config.seeds.data}}},
  };
  return doc.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_json(config);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

}  // namespace qstack
