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

#include "qstack/report.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "qstack/csv.hpp"

namespace qstack {
namespace {

using nlohmann::json;

void require_rows(const ScoreReport& report) {
  if (report.table.rows.empty()) throw std::invalid_argument("score report has no algorithms");
}

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_scores_csv(const ScoreReport& report, const std::filesystem::path& path) {
  require_rows(report);
  std::ofstream out = open(path);
  write_scores_csv(report, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_scores_csv(const ScoreReport& report, std::ostream& out) {
  require_rows(report);
  const RunMetadata& m = report.metadata;
  out << "# version: " << m.version << '\n'
      << "# config_hash: " << m.config_hash << '\n'
      << "# seeds: split=" << m.split_seed << " ensemble=" << m.ensemble_seed
      << " learners=" << m.learner_seed << " data=" << m.data_seed << '\n'
      << "# benchmark: " << report.table.benchmark << '\n'
      << "algorithm,level,mean_score,skill_vs_benchmark,coverage,rank\n";
  for (const ScoreRow& r : report.table.rows) {
    out << csv::join(std::vector<std::string>{r.algorithm, csv::format_double(r.level),
                                              csv::format_double(r.mean_score), csv::format_double(r.skill),
                                              csv::format_double(r.coverage), std::to_string(r.rank)})
        << '\n';
  }
}

void write_scores_json(const ScoreReport& report, const std::filesystem::path& path) {
  require_rows(report);
  const RunMetadata& m = report.metadata;
  json rows = json::array();
  for (const ScoreRow& r : report.table.rows) {
    rows.push_back({{"algorithm", r.algorithm},
                    {"level", r.level},
                    {"mean_score", r.mean_score},
                    {"skill_vs_benchmark", r.skill},
                    {"coverage", r.coverage},
                    {"rank", r.rank}});
  }
  json oracle = json::array();
  for (const ReferenceScore& o : report.oracle) {
    oracle.push_back({{"level", o.level}, {"mean_score", o.mean_score}, {"standard_error", o.standard_error}});
  }
  const auto levels = report.table.levels.values();
  const json doc = {
      {"metadata",
       {{"version", m.version},
        {"config_hash", m.config_hash},
        {"seeds",
         {{"split", m.split_seed}, {"ensemble", m.ensemble_seed}, {"learners", m.learner_seed}, {"data", m.data_seed}}}}},
      {"benchmark", report.table.benchmark},
      {"levels", std::vector<double>(levels.begin(), levels.end())},
      {"scores", rows},
      {"oracle", oracle},
  };
  std::ofstream out = open(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ScoreReport read_scores_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    const json doc = json::parse(in);
    ScoreReport report;
    const json& m = doc.at("metadata");
    report.metadata.version = m.at("version").get<std::string>();
    report.metadata.config_hash = m.at("config_hash").get<std::string>();
    const json& seeds = m.at("seeds");
    report.metadata.split_seed = seeds.at("split").get<std::uint64_t>();
    report.metadata.ensemble_seed = seeds.at("ensemble").get<std::uint64_t>();
    report.metadata.learner_seed = seeds.at("learners").get<std::uint64_t>();
    report.metadata.data_seed = seeds.at("data").get<std::uint64_t>();
    report.table.benchmark = doc.at("benchmark").get<std::string>();
    report.table.levels = QuantileLevelGrid(doc.at("levels").get<std::vector<double>>());
    for (const json& r : doc.at("scores")) {
      report.table.rows.push_back({r.at("algorithm").get<std::string>(), r.at("level").get<double>(),
                                   r.at("mean_score").get<double>(), r.at("skill_vs_benchmark").get<double>(),
                                   r.at("coverage").get<double>(), r.at("rank").get<int>()});
    }
    for (const json& o : doc.at("oracle")) {
      report.oracle.push_back(
          {o.at("level").get<double>(), o.at("mean_score").get<double>(), o.at("standard_error").get<double>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed score report " + path.string() + ": " + e.what());
  }
}

}  // namespace qstack
