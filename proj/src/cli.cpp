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

#include "citymig/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "citymig/csv.hpp"
#include "citymig/error.hpp"
#include "citymig/fit.hpp"
#include "citymig/pipeline.hpp"
#include "citymig/synthetic.hpp"

namespace citymig {

namespace {

namespace fs = std::filesystem;

// Raw option values; converted into a PipelineConfig after parsing.
struct Options {
  std::string corpus;
  std::string gazetteer;
  std::string seeds;
  std::string out = "out";
  std::uint64_t seed = 42;
  bool quiet = false;

  double lambda1 = 1.0;
  double lambda2 = 3.0;
  double lambda3 = 2.0;
  bool raw_weights = false;
  int max_iterations = 100;
  double tolerance = 1e-6;
  std::size_t chunk_width = 0;
  int checkpoint_every = 0;
  bool resume = false;

  int min_year = 1900;
  int max_year = 2100;
  std::size_t station_cap = 10;
  int baseline_year = 0;
  int max_kth = 5;

  std::vector<std::string> families{"lognormal", "gamma", "exponential", "invgauss", "powerlaw"};
  std::string criterion = "bic";

  std::uint64_t min_count = 10;
  bool hits_binary = false;
  int hits_max_iterations = 100;
  double hits_tolerance = 1e-8;
  double damping = 0.85;
  double pagerank_tolerance = 1e-10;
  int pagerank_max_iterations = 1000;
  double hub_quantile = 0.9;
  double authority_quantile = 0.9;

  std::size_t researchers = 10000;
  double horizon = 30.0;

  std::string series;
  synthetic::SyntheticOptions synth;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

pipeline::PipelineConfig to_config(const Options& o, bool baseline_set) {
  pipeline::PipelineConfig c;
  c.corpus = o.corpus;
  c.gazetteer = o.gazetteer;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  c.out = o.out;
  c.parse = {o.min_year, o.max_year};
  c.weights = {o.lambda1, o.lambda2, o.lambda3};
  c.raw_weights = o.raw_weights;
  c.propagation.max_iterations = o.max_iterations;
  c.propagation.tolerance = o.tolerance;
  c.propagation.chunk_width = o.chunk_width;
  c.checkpoint_every = o.checkpoint_every;
  c.resume = o.resume;
  c.sketch.station_cap = o.station_cap;
  if (baseline_set) c.baseline_year = o.baseline_year;
  c.max_kth_move = o.max_kth;
  c.families.clear();
  for (const auto& name : o.families) {
    const auto family = fit::parse_family(name);
    if (!family) throw UsageError("unknown distribution family '" + name + "'");
    if (std::find(c.families.begin(), c.families.end(), *family) == c.families.end()) {
      c.families.push_back(*family);
    }
  }
  c.criterion = o.criterion == "loglik" ? fit::SelectionCriterion::kLogLikelihood
                                        : fit::SelectionCriterion::kBic;
  c.min_count = o.min_count;
  c.hits.weighted = !o.hits_binary;
  c.hits.max_iterations = o.hits_max_iterations;
  c.hits.tolerance = o.hits_tolerance;
  c.pagerank.damping = o.damping;
  c.pagerank.tolerance = o.pagerank_tolerance;
  c.pagerank.max_iterations = o.pagerank_max_iterations;
  c.pagerank.weighted = !o.hits_binary;
  c.thresholds = {o.hub_quantile, o.authority_quantile};
  c.seed = o.seed;
  c.simulated_researchers = o.researchers;
  c.simulation_horizon = o.horizon;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void require_inputs(const pipeline::PipelineConfig& c) {
  if (c.corpus.empty()) throw UsageError("--corpus is required");
  if (c.gazetteer.empty()) throw UsageError("--gazetteer is required");
}

void run_generate(const Options& o, std::ostream& log) {
  synthetic::SyntheticOptions s = o.synth;
  s.seed = o.seed;
  synthetic::SyntheticCorpus corpus;
  try {
    corpus = synthetic::generate(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = o.out;
  fs::create_directories(dir);
  std::ofstream records(dir / "corpus.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream gazetteer(dir / "gazetteer.csv", std::ios::binary | std::ios::trunc);
  std::ofstream planted(dir / "planted_moves.csv", std::ios::binary | std::ios::trunc);
  if (!records || !gazetteer || !planted) throw DataError("cannot write to " + dir.string());
  ingest::write_corpus(records, corpus.records);
  synthetic::write_gazetteer(gazetteer, corpus.gazetteer);
  csv::write_row(planted, {"from", "to", "gap"});
  for (const auto& m : corpus.moves) csv::write_row(planted, {m.from, m.to, std::to_string(m.gap)});
  log << "generate: " << corpus.records.size() << " records, " << corpus.moves.size()
      << " planted moves, " << corpus.mobile_authors << " mobile authors\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"City label propagation and researcher migration analysis", "citymig"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI-style key = value configuration file");
  app.get_config_ptr()->envname("CITYMIG_CONFIG");

  Options o;
  auto opt = [&](const std::string& name, auto& target, const std::string& help,
                 const std::string& env) {
    return app.add_option(name, target, help)->envname(env)->capture_default_str();
  };
  opt("--corpus", o.corpus, "Corpus file (.jsonl, or DBLP-style .xml)", "CITYMIG_CORPUS");
  opt("--gazetteer", o.gazetteer, "Gazetteer CSV", "CITYMIG_GAZETTEER");
  opt("--seeds", o.seeds, "Extra seed affiliations CSV (paper_id,author,text)", "CITYMIG_SEEDS");
  opt("--out", o.out, "Artifact directory", "CITYMIG_OUT");
  opt("--seed", o.seed, "Random seed", "CITYMIG_SEED");
  app.add_flag("--quiet", o.quiet, "Suppress progress output");

  opt("--lambda1", o.lambda1, "Co-author rule weight", "CITYMIG_LAMBDA1");
  opt("--lambda2", o.lambda2, "Same author, same year rule weight", "CITYMIG_LAMBDA2");
  opt("--lambda3", o.lambda3, "Same author, adjacent year rule weight", "CITYMIG_LAMBDA3");
  app.add_flag("--raw-weights", o.raw_weights, "Propagate on the unnormalised similarity matrix")
      ->envname("CITYMIG_RAW_WEIGHTS");
  opt("--max-iterations", o.max_iterations, "Propagation iteration cap", "CITYMIG_MAX_ITERATIONS");
  opt("--tolerance", o.tolerance, "Propagation max-norm tolerance", "CITYMIG_TOLERANCE");
  opt("--chunk-width", o.chunk_width, "Label columns per chunk (0: all)", "CITYMIG_CHUNK_WIDTH");
  opt("--checkpoint-every", o.checkpoint_every, "Checkpoint interval in iterations (0: final only)",
      "CITYMIG_CHECKPOINT_EVERY");
  app.add_flag("--resume", o.resume, "Resume propagation from checkpoint.bin");

  opt("--min-year", o.min_year, "Earliest accepted publication year", "CITYMIG_MIN_YEAR");
  opt("--max-year", o.max_year, "Latest accepted publication year", "CITYMIG_MAX_YEAR");
  opt("--station-cap", o.station_cap, "Drop sketches with more stations", "CITYMIG_STATION_CAP");
  auto* baseline = opt("--baseline-year", o.baseline_year,
                       "Anchor the pooled inter-arrival series at this year", "CITYMIG_BASELINE_YEAR");
  opt("--max-kth", o.max_kth, "Largest k for k-th move propensities", "CITYMIG_MAX_KTH");

  opt("--families", o.families, "Distribution families to fit", "CITYMIG_FAMILIES")
      ->delimiter(',');
  opt("--criterion", o.criterion, "Model selection criterion", "CITYMIG_CRITERION")
      ->check(CLI::IsMember({"bic", "loglik"}));

  opt("--min-count", o.min_count, "Smallest inter-city link weight kept for frequency fitting",
      "CITYMIG_MIN_COUNT");
  app.add_flag("--hits-binary", o.hits_binary, "Collapse link weights to 0/1 for HITS and PageRank")
      ->envname("CITYMIG_HITS_BINARY");
  opt("--hits-max-iterations", o.hits_max_iterations, "HITS iteration cap",
      "CITYMIG_HITS_MAX_ITERATIONS");
  opt("--hits-tolerance", o.hits_tolerance, "HITS max-norm tolerance", "CITYMIG_HITS_TOLERANCE");
  opt("--damping", o.damping, "PageRank damping factor", "CITYMIG_DAMPING");
  opt("--pagerank-tolerance", o.pagerank_tolerance, "PageRank L1 tolerance",
      "CITYMIG_PAGERANK_TOLERANCE");
  opt("--pagerank-max-iterations", o.pagerank_max_iterations, "PageRank iteration cap",
      "CITYMIG_PAGERANK_MAX_ITERATIONS");
  opt("--hub-quantile", o.hub_quantile, "Quantile above which a hub score is high",
      "CITYMIG_HUB_QUANTILE");
  opt("--authority-quantile", o.authority_quantile,
      "Quantile above which an authority score is high", "CITYMIG_AUTHORITY_QUANTILE");

  opt("--researchers", o.researchers, "Researchers in the job-market simulation",
      "CITYMIG_RESEARCHERS");
  opt("--horizon", o.horizon, "Simulated years", "CITYMIG_HORIZON");

  using Stage = std::function<void(const pipeline::PipelineConfig&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Stage>> stages;
  auto stage = [&](const std::string& name, const std::string& help, Stage fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    stages.emplace_back(sub, std::move(fn));
    return sub;
  };
  stage("ingest", "Parse the corpus, resolve seed affiliations, emit nodes",
        [](const auto& c, auto& log) {
          require_inputs(c);
          pipeline::run_ingest(c, log);
        });
  stage("build-graph", "Build the rule-weighted similarity graph", pipeline::run_build_graph);
  stage("propagate", "Propagate city labels over the graph", pipeline::run_propagate);
  stage("sketch", "Extract migration sketches, moves and timing series", pipeline::run_sketch);
  CLI::App* fit_cmd = stage("fit", "Fit distribution families to the timing series",
                            [&](const auto& c, auto& log) {
                              std::optional<fs::path> only;
                              if (!o.series.empty()) only = o.series;
                              pipeline::run_fit(c, log, only);
                            });
  fit_cmd->add_option("--series", o.series, "Fit only this series file");
  stage("linkrank", "Inter-city migration graph, frequencies, HITS and PageRank",
        pipeline::run_linkrank);
  stage("report", "Bundle statistics, fits, rankings and simulation into report.json",
        pipeline::run_report);
  stage("all", "Run every stage in order", [](const auto& c, auto& log) {
    require_inputs(c);
    pipeline::run_all(c, log);
  });

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic corpus with planted regularities");
  gen->add_option("--authors", o.synth.authors, "Authors")->capture_default_str();
  gen->add_option("--cities", o.synth.cities, "Cities")->capture_default_str();
  gen->add_option("--countries", o.synth.countries, "Countries")->capture_default_str();
  gen->add_option("--city-pairs", o.synth.city_pairs, "Linked city pairs")->capture_default_str();
  gen->add_option("--pair-alpha", o.synth.pair_alpha, "Power-law exponent of link weights")
      ->capture_default_str();
  gen->add_option("--pair-xmin", o.synth.pair_xmin, "Smallest link weight")->capture_default_str();
  gen->add_option("--gap-mu", o.synth.gap_mu, "Log-mean of move gaps")->capture_default_str();
  gen->add_option("--gap-sigma", o.synth.gap_sigma, "Log-sd of move gaps")->capture_default_str();
  gen->add_option("--max-moves", o.synth.max_moves_per_author, "Moves per author at most")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::ostream null_stream(nullptr);
  std::ostream& log = o.quiet ? null_stream : out;
  try {
    if (gen->parsed()) {
      run_generate(o, log);
      return kExitOk;
    }
    const auto config = to_config(o, baseline->count() > 0);
    for (const auto& [sub, fn] : stages) {
      if (sub->parsed()) fn(config, log);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const fit::FitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

}  // namespace citymig
