// Copyright 2026 The citymig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CITYMIG_PIPELINE_HPP_
#define CITYMIG_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "citymig/error.hpp"
#include "citymig/fit.hpp"
#include "citymig/graph.hpp"
#include "citymig/ingest.hpp"
#include "citymig/linkrank.hpp"
#include "citymig/propagation.hpp"
#include "citymig/sketch.hpp"

namespace citymig::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path corpus;
  fs::path gazetteer;
  std::optional<fs::path> seeds;
  fs::path out = "out";

  ingest::ParseOptions parse;
  graph::RuleWeights weights;
  // Propagate on the raw similarity matrix instead of its row-normalised form.
  bool raw_weights = false;
  propagation::PropagationConfig propagation;
  // Also write checkpoint.bin every n iterations (0: final state only).
  int checkpoint_every = 0;
  bool resume = false;

  sketch::SketchOptions sketch;
  std::optional<int> baseline_year;
  int max_kth_move = 5;

  std::vector<fit::Family> families{fit::kAllFamilies.begin(), fit::kAllFamilies.end()};
  fit::SelectionCriterion criterion = fit::SelectionCriterion::kBic;
  fit::PlotGrid plot;

  std::uint64_t min_count = 10;
  linkrank::HitsOptions hits;
  linkrank::PageRankOptions pagerank;
  linkrank::RoleThresholds thresholds;

  std::uint64_t seed = 42;
  std::size_t simulated_researchers = 10000;
  double simulation_horizon = 30.0;

  // Throws std::invalid_argument.
  void validate() const;
};

// An input produced by an earlier stage is absent.
class MissingArtifact : public DataError {
 public:
  MissingArtifact(const fs::path& path, const std::string& stage)
      : DataError("missing " + path.string() + "; run `citymig " + stage + "` first") {}
};

// Stage entry points. Each reads the artifacts of the previous stage from
// config.out and writes its own; progress lines go to `log`.
void run_ingest(const PipelineConfig& config, std::ostream& log);
void run_build_graph(const PipelineConfig& config, std::ostream& log);
void run_propagate(const PipelineConfig& config, std::ostream& log);
void run_sketch(const PipelineConfig& config, std::ostream& log);
// Fits every series under out/series. With `only`, fits that file alone and
// failures are fatal; otherwise failures are recorded in the series report.
void run_fit(const PipelineConfig& config, std::ostream& log,
             const std::optional<fs::path>& only = std::nullopt);
void run_linkrank(const PipelineConfig& config, std::ostream& log);
void run_report(const PipelineConfig& config, std::ostream& log);
void run_all(const PipelineConfig& config, std::ostream& log);

// Artifact formats shared by the stages.

// CSV `node_id,author_id,paper_id,year,city_id` (empty city_id: unlabeled).
void write_nodes(std::ostream& out, std::span<const ingest::AuthorPaperNode> nodes);
std::vector<ingest::AuthorPaperNode> read_nodes(std::istream& in);

// CSV `city_id,city,country,continent,lat,lon`.
void write_cities(std::ostream& out, const sketch::CityTable& cities);
sketch::CityTable read_cities(std::istream& in);

// CSV `author_id,paper_id,city_id,confidence`, one row per node in node
// order; unassigned nodes have an empty city_id.
struct LabelRow {
  AuthorId author;
  PaperId paper;
  std::optional<CityId> city;
  double confidence = 0.0;
};
void write_labels(std::ostream& out, std::span<const LabelRow> rows);
std::vector<LabelRow> read_labels(std::istream& in);

// CSV `author_id,from,to,at_year,ordinal`.
void write_moves(std::ostream& out, std::span<const sketch::Move> moves);
std::vector<sketch::Move> read_moves(std::istream& in);

// CSV `year,publications,authors,moves,moves_per_author`.
void write_yearly(std::ostream& out, std::span<const sketch::YearRow> rows);
std::vector<sketch::YearRow> read_yearly(std::istream& in);

// Names of the series files written by the sketch stage, without extension.
std::vector<std::string> series_names(const PipelineConfig& config);

}  // namespace citymig::pipeline

#endif  // CITYMIG_PIPELINE_HPP_
