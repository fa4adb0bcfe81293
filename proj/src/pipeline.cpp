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

#include "citymig/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <utility>

#include "citymig/csv.hpp"
#include "citymig/simulate.hpp"
#include "json.hpp"

namespace citymig::pipeline {

namespace {

using nlohmann::json;

constexpr const char* kRecords = "records.jsonl";
constexpr const char* kNodes = "nodes.csv";
constexpr const char* kCities = "cities.csv";
constexpr const char* kGraph = "graph.txt";
constexpr const char* kLabels = "labels.csv";
constexpr const char* kCheckpoint = "checkpoint.bin";
constexpr const char* kMoves = "moves.csv";
constexpr const char* kYearly = "yearly_stats.csv";
constexpr const char* kRankings = "rankings.csv";
constexpr const char* kFrequency = "frequency";

std::ifstream open_artifact(const fs::path& path, const std::string& stage) {
  if (!fs::exists(path)) throw MissingArtifact(path, stage);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ifstream open_input(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw DataError(what + " not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& value) {
  auto out = open_output(path);
  out << value.dump(2) << '\n';
}

json read_json(const fs::path& path, const std::string& stage) {
  auto in = open_artifact(path, stage);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON in " + path.string());
  return j;
}

csv::Row require_header(csv::Reader& reader, const csv::Row& expected, const std::string& name) {
  auto header = reader.next();
  if (!header || *header != expected) {
    std::string want;
    for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
    throw DataError(name + ": header must be " + want);
  }
  return *header;
}

std::string where(const std::string& name, const csv::Reader& reader) {
  return " (" + name + " line " + std::to_string(reader.line_number()) + ")";
}

template <class F>
auto parse_field(F&& f, const std::string& context) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what() + context);
  } catch (const std::out_of_range& e) {
    throw DataError(e.what() + context);
  }
}

std::map<CityId, std::string> country_map(const sketch::CityTable& cities) {
  std::map<CityId, std::string> out;
  for (const auto& [id, city] : cities) out.emplace(id, city.country);
  return out;
}

fs::path series_path(const PipelineConfig& config, const std::string& name) {
  return config.out / "series" / (name + ".txt");
}

std::vector<double> read_series_file(const fs::path& path, const std::string& stage) {
  auto in = open_artifact(path, stage);
  try {
    return sketch::read_series(in);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string(e.what()) + " in " + path.string());
  }
}

// Fits one series and writes fit/<name>.json plus fit/<name>_plot.csv.
// Returns false when no family could be fitted.
bool fit_and_write(const PipelineConfig& config, const std::string& name,
                   std::span<const double> values, std::ostream& log, bool fatal) {
  const fs::path dir = config.out / "fit";
  try {
    if (values.empty()) throw fit::FitError("series " + name + " is empty");
    const fit::FitReport report = fit::select_model(values, config.families, name, config.criterion);
    write_json(dir / (name + ".json"), fit::to_json(report));
    auto plot = open_output(dir / (name + "_plot.csv"));
    fit::write_plot_data(plot, values, report, config.plot);
    log << "fit " << name << ": n=" << report.n << " selected=" << fit::family_name(report.selected)
        << '\n';
    return true;
  } catch (const fit::FitError& e) {
    if (fatal) throw;
    write_json(dir / (name + ".json"), json{{"series", name}, {"n", values.size()}, {"error", e.what()}});
    fs::remove(dir / (name + "_plot.csv"));
    log << "fit " << name << ": skipped (" << e.what() << ")\n";
    return false;
  }
}

json mean_or_null(std::span<const double> values) {
  if (values.empty()) return nullptr;
  return fit::empirical_stats(values).mean;
}

}  // namespace

void PipelineConfig::validate() const {
  weights.validate();
  propagation.validate();
  if (sketch.station_cap < 1) throw std::invalid_argument("sketch cap must be at least 1");
  if (max_kth_move < 2) throw std::invalid_argument("max k-th move must be at least 2");
  if (families.empty()) throw std::invalid_argument("at least one fit family is required");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint interval must be >= 0");
  if (parse.min_year > parse.max_year) throw std::invalid_argument("min year exceeds max year");
  if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1)");
  }
  if (hits.max_iterations < 1 || pagerank.max_iterations < 1) {
    throw std::invalid_argument("link analysis needs at least one iteration");
  }
  for (double q : {thresholds.hub_quantile, thresholds.authority_quantile}) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("role quantiles must lie in [0, 1]");
  }
  if (simulated_researchers < 1 || !(simulation_horizon > 0.0)) {
    throw std::invalid_argument("simulation needs researchers >= 1 and a positive horizon");
  }
  if (out.empty()) throw std::invalid_argument("output directory is required");
}

// ---------------------------------------------------------------------------
// Artifact formats

void write_nodes(std::ostream& out, std::span<const ingest::AuthorPaperNode> nodes) {
  csv::write_row(out, {"node_id", "author_id", "paper_id", "year", "city_id"});
  for (const auto& n : nodes) {
    csv::write_row(out, {std::to_string(n.id), n.author, n.paper, std::to_string(n.year),
                         n.label.value_or("")});
  }
}

std::vector<ingest::AuthorPaperNode> read_nodes(std::istream& in) {
  csv::Reader reader(in);
  require_header(reader, {"node_id", "author_id", "paper_id", "year", "city_id"}, kNodes);
  std::vector<ingest::AuthorPaperNode> nodes;
  while (auto row = reader.next()) {
    const std::string at = where(kNodes, reader);
    if (row->size() != 5) throw DataError("wrong field count" + at);
    ingest::AuthorPaperNode n;
    n.id = parse_field([&] { return static_cast<NodeId>(csv::parse_int((*row)[0])); }, at);
    if (n.id != nodes.size()) throw DataError("node ids must be 0..n-1 in order" + at);
    n.author = (*row)[1];
    n.paper = (*row)[2];
    n.year = parse_field([&] { return static_cast<int>(csv::parse_int((*row)[3])); }, at);
    if (!(*row)[4].empty()) n.label = (*row)[4];
    nodes.push_back(std::move(n));
  }
  return nodes;
}

void write_cities(std::ostream& out, const sketch::CityTable& cities) {
  csv::write_row(out, {"city_id", "city", "country", "continent", "lat", "lon"});
  for (const auto& [id, c] : cities) {
    csv::write_row(out, {id, c.name, c.country, c.continent, csv::format_double(c.latitude),
                         csv::format_double(c.longitude)});
  }
}

sketch::CityTable read_cities(std::istream& in) {
  csv::Reader reader(in);
  require_header(reader, {"city_id", "city", "country", "continent", "lat", "lon"}, kCities);
  sketch::CityTable cities;
  while (auto row = reader.next()) {
    const std::string at = where(kCities, reader);
    if (row->size() != 6) throw DataError("wrong field count" + at);
    ingest::City c;
    c.id = (*row)[0];
    c.name = (*row)[1];
    c.country = (*row)[2];
    c.continent = (*row)[3];
    c.latitude = parse_field([&] { return csv::parse_double((*row)[4]); }, at);
    c.longitude = parse_field([&] { return csv::parse_double((*row)[5]); }, at);
    cities.emplace(c.id, std::move(c));
  }
  return cities;
}

void write_labels(std::ostream& out, std::span<const LabelRow> rows) {
  csv::write_row(out, {"author_id", "paper_id", "city_id", "confidence"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.author, r.paper, r.city.value_or(""), csv::format_double(r.confidence)});
  }
}

std::vector<LabelRow> read_labels(std::istream& in) {
  csv::Reader reader(in);
  require_header(reader, {"author_id", "paper_id", "city_id", "confidence"}, kLabels);
  std::vector<LabelRow> rows;
  while (auto row = reader.next()) {
    const std::string at = where(kLabels, reader);
    if (row->size() != 4) throw DataError("wrong field count" + at);
    LabelRow r;
    r.author = (*row)[0];
    r.paper = (*row)[1];
    if (!(*row)[2].empty()) r.city = (*row)[2];
    r.confidence = parse_field([&] { return csv::parse_double((*row)[3]); }, at);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_moves(std::ostream& out, std::span<const sketch::Move> moves) {
  csv::write_row(out, {"author_id", "from", "to", "at_year", "ordinal"});
  for (const auto& m : moves) {
    csv::write_row(out, {m.author, m.from, m.to, std::to_string(m.at_year),
                         std::to_string(m.ordinal)});
  }
}

std::vector<sketch::Move> read_moves(std::istream& in) {
  csv::Reader reader(in);
  require_header(reader, {"author_id", "from", "to", "at_year", "ordinal"}, kMoves);
  std::vector<sketch::Move> moves;
  while (auto row = reader.next()) {
    const std::string at = where(kMoves, reader);
    if (row->size() != 5) throw DataError("wrong field count" + at);
    sketch::Move m;
    m.author = (*row)[0];
    m.from = (*row)[1];
    m.to = (*row)[2];
    m.at_year = parse_field([&] { return static_cast<int>(csv::parse_int((*row)[3])); }, at);
    m.ordinal = parse_field([&] { return static_cast<int>(csv::parse_int((*row)[4])); }, at);
    if (m.from == m.to) throw DataError("move between identical cities" + at);
    moves.push_back(std::move(m));
  }
  return moves;
}

void write_yearly(std::ostream& out, std::span<const sketch::YearRow> rows) {
  csv::write_row(out, {"year", "publications", "authors", "moves", "moves_per_author"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.year), std::to_string(r.publications),
                         std::to_string(r.authors), std::to_string(r.moves),
                         csv::format_double(r.moves_per_author)});
  }
}

std::vector<sketch::YearRow> read_yearly(std::istream& in) {
  csv::Reader reader(in);
  require_header(reader, {"year", "publications", "authors", "moves", "moves_per_author"}, kYearly);
  std::vector<sketch::YearRow> rows;
  while (auto row = reader.next()) {
    const std::string at = where(kYearly, reader);
    if (row->size() != 5) throw DataError("wrong field count" + at);
    sketch::YearRow r;
    parse_field(
        [&] {
          r.year = static_cast<int>(csv::parse_int((*row)[0]));
          r.publications = static_cast<std::size_t>(csv::parse_int((*row)[1]));
          r.authors = static_cast<std::size_t>(csv::parse_int((*row)[2]));
          r.moves = static_cast<std::size_t>(csv::parse_int((*row)[3]));
          r.moves_per_author = csv::parse_double((*row)[4]);
          return 0;
        },
        at);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> series_names(const PipelineConfig& config) {
  std::vector<std::string> names{"propensity"};
  for (int k = 2; k <= config.max_kth_move; ++k) names.push_back("kth_" + std::to_string(k));
  names.insert(names.end(), {"brain_circulation", "interarrival", "waiting"});
  return names;
}

// ---------------------------------------------------------------------------
// Stages

void run_ingest(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  ingest::ParseResult parsed;
  {
    auto in = open_input(config.corpus, "corpus");
    parsed = ingest::reader_for(config.corpus)->read(in, config.parse);
  }
  std::size_t seed_rows = 0;
  std::size_t seed_rows_unmatched = 0;
  if (config.seeds) {
    auto in = open_input(*config.seeds, "seed file");
    const auto rows = ingest::load_seeds_csv(in);
    seed_rows = rows.size();
    seed_rows_unmatched = ingest::attach_seeds(parsed.records, rows);
  }
  ingest::Gazetteer gazetteer = [&] {
    auto in = open_input(config.gazetteer, "gazetteer");
    return ingest::Gazetteer::load_csv(in);
  }();
  const ingest::NodeSet nodes = ingest::build_nodes(parsed.records, gazetteer);

  fs::create_directories(config.out);
  {
    auto out = open_output(config.out / kRecords);
    ingest::write_corpus(out, parsed.records);
  }
  {
    auto out = open_output(config.out / kNodes);
    write_nodes(out, nodes.nodes);
  }
  {
    auto out = open_output(config.out / kCities);
    write_cities(out, nodes.cities);
  }
  {
    auto out = open_output(config.out / "skips.csv");
    ingest::write_skip_report(out, parsed.skips);
  }
  {
    auto out = open_output(config.out / "seed_conflicts.csv");
    csv::write_row(out, {"author_id", "paper_id", "kept", "rejected"});
    for (const auto& c : nodes.conflicts) csv::write_row(out, {c.author, c.paper, c.kept, c.rejected});
  }
  write_json(config.out / "ingest_summary.json",
             json{{"records", parsed.records.size()},
                  {"skipped", parsed.skips.size()},
                  {"nodes", nodes.nodes.size()},
                  {"labeled_nodes", nodes.labeled_count()},
                  {"seeds_resolved", nodes.seeds_resolved},
                  {"seeds_missed", nodes.seeds_missed},
                  {"seed_rows", seed_rows},
                  {"seed_rows_unmatched", seed_rows_unmatched},
                  {"seed_conflicts", nodes.conflicts.size()},
                  {"cities", nodes.cities.size()},
                  {"gazetteer_keys", gazetteer.key_count()},
                  {"normalization", gazetteer.policy().id()}});
  log << "ingest: " << parsed.records.size() << " records, " << parsed.skips.size()
      << " skipped, " << nodes.nodes.size() << " nodes, " << nodes.labeled_count()
      << " labeled\n";
}

void run_build_graph(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  auto in = open_artifact(config.out / kNodes, "ingest");
  const auto nodes = read_nodes(in);
  const graph::SimilarityGraph g = graph::build_graph(nodes, config.weights);
  {
    auto out = open_output(config.out / kGraph);
    graph::write_matrix(out, g.weights);
  }
  write_json(config.out / "graph_summary.json",
             json{{"nodes", g.size()},
                  {"edges", g.edge_count()},
                  {"weights",
                   {{"co_author", config.weights.co_author},
                    {"same_year", config.weights.same_year},
                    {"adjacent_year", config.weights.adjacent_year}}}});
  log << "build-graph: " << g.size() << " nodes, " << g.edge_count() << " edges\n";
}

void run_propagate(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  std::vector<ingest::AuthorPaperNode> nodes;
  {
    auto in = open_artifact(config.out / kNodes, "ingest");
    nodes = read_nodes(in);
  }
  graph::SparseMatrix weights;
  {
    auto in = open_artifact(config.out / kGraph, "build-graph");
    try {
      weights = graph::read_matrix(in);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string(e.what()) + " in " + kGraph);
    }
  }
  if (weights.size() != nodes.size()) {
    throw DataError(std::string(kGraph) + " does not match " + kNodes +
                    "; run `citymig build-graph` again");
  }

  std::vector<CityId> label_ids;
  for (const auto& n : nodes) {
    if (n.label) label_ids.push_back(*n.label);
  }
  std::sort(label_ids.begin(), label_ids.end());
  label_ids.erase(std::unique(label_ids.begin(), label_ids.end()), label_ids.end());
  if (label_ids.empty()) throw DataError("no seed labels; nothing to propagate");

  std::vector<std::optional<std::size_t>> seeds(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].label) {
      seeds[i] = static_cast<std::size_t>(
          std::lower_bound(label_ids.begin(), label_ids.end(), *nodes[i].label) -
          label_ids.begin());
    }
  }
  const auto y0 = propagation::LabelMatrix::from_seeds(label_ids.size(), seeds);
  const graph::SparseMatrix transition =
      config.raw_weights ? weights : graph::row_normalize(graph::make_graph(weights));

  const fs::path checkpoint_path = config.out / kCheckpoint;
  propagation::IterationHook hook;
  if (config.checkpoint_every > 0) {
    hook = [&](int iteration, const propagation::LabelMatrix& state) {
      if (iteration % config.checkpoint_every != 0) return;
      auto out = open_output(checkpoint_path);
      propagation::write_checkpoint(out, state, iteration);
    };
  }

  propagation::PropagationResult result;
  bool resumed = false;
  if (config.resume && fs::exists(checkpoint_path)) {
    auto in = open_artifact(checkpoint_path, "propagate");
    propagation::Checkpoint cp;
    try {
      cp = propagation::read_checkpoint(in);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string(e.what()) + " in " + kCheckpoint);
    }
    result = propagation::resume(transition, y0, cp, config.propagation, hook);
    resumed = true;
  } else {
    result = propagation::propagate_chunked(transition, y0, config.propagation, hook);
  }
  {
    auto out = open_output(checkpoint_path);
    propagation::write_checkpoint(out, result.labels, result.iterations);
  }

  const auto assignments = propagation::readout(result.labels);
  std::vector<LabelRow> rows;
  rows.reserve(nodes.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    LabelRow r{nodes[i].author, nodes[i].paper, std::nullopt, assignments[i].confidence};
    if (assignments[i].label) {
      r.city = label_ids[*assignments[i].label];
      ++assigned;
    }
    rows.push_back(std::move(r));
  }
  {
    auto out = open_output(config.out / kLabels);
    write_labels(out, rows);
  }
  write_json(config.out / "propagate_summary.json",
             json{{"nodes", nodes.size()},
                  {"labels", label_ids.size()},
                  {"seeds", y0.seed_count()},
                  {"iterations", result.iterations},
                  {"converged", result.converged},
                  {"last_change", result.last_change},
                  {"assigned", assigned},
                  {"unassigned", nodes.size() - assigned},
                  {"chunk_width", config.propagation.chunk_width},
                  {"raw_weights", config.raw_weights},
                  {"resumed", resumed}});
  log << "propagate: " << result.iterations << " iterations"
      << (result.converged ? " (converged)" : " (iteration cap)") << ", " << assigned << "/"
      << nodes.size() << " assigned\n";
}

void run_sketch(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  std::vector<ingest::AuthorPaperNode> nodes;
  {
    auto in = open_artifact(config.out / kNodes, "ingest");
    nodes = read_nodes(in);
  }
  std::vector<LabelRow> label_rows;
  {
    auto in = open_artifact(config.out / kLabels, "propagate");
    label_rows = read_labels(in);
  }
  if (label_rows.size() != nodes.size()) {
    throw DataError(std::string(kLabels) + " does not match " + kNodes +
                    "; run `citymig propagate` again");
  }
  std::vector<std::optional<CityId>> labels;
  labels.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (label_rows[i].author != nodes[i].author || label_rows[i].paper != nodes[i].paper) {
      throw DataError(std::string(kLabels) + " row " + std::to_string(i + 2) +
                      " does not match " + kNodes + "; run `citymig propagate` again");
    }
    labels.push_back(label_rows[i].city);
  }
  sketch::CityTable cities;
  {
    auto in = open_artifact(config.out / kCities, "ingest");
    cities = read_cities(in);
  }
  ingest::ParseResult records;
  {
    auto in = open_artifact(config.out / kRecords, "ingest");
    records = ingest::JsonLinesReader{}.read(in, config.parse);
  }

  const sketch::SketchSet set = sketch::extract_sketches(nodes, labels, config.sketch);
  const auto moves = sketch::all_moves(set.sketches);

  std::vector<std::pair<std::string, sketch::TimingSeries>> series;
  series.emplace_back("propensity", sketch::propensities(set.sketches));
  for (int k = 2; k <= config.max_kth_move; ++k) {
    series.emplace_back("kth_" + std::to_string(k), sketch::kth_move_propensities(set.sketches, k));
  }
  const auto circulation = sketch::brain_circulation(set.sketches, country_map(cities));
  series.emplace_back("brain_circulation", circulation.series);
  const auto pooled = sketch::pooled_arrivals(moves, config.baseline_year);
  series.emplace_back("interarrival", pooled.interarrival);
  series.emplace_back("waiting", pooled.waiting);

  {
    auto out = open_output(config.out / "sketches.jsonl");
    sketch::write_sketches(out, set.sketches);
  }
  {
    auto out = open_output(config.out / kMoves);
    write_moves(out, moves);
  }
  json series_summary = json::object();
  for (const auto& [name, s] : series) {
    auto out = open_output(series_path(config, name));
    sketch::write_series(out, s);
    series_summary[name] = {{"n", s.values.size()}, {"zero_excluded", s.zero_excluded}};
  }
  const auto yearly = sketch::yearly_stats(records.records, moves);
  {
    auto out = open_output(config.out / kYearly);
    write_yearly(out, yearly);
  }
  write_json(config.out / "sketch_summary.json",
             json{{"sketches", set.sketches.size()},
                  {"dropped_over_cap", set.dropped_over_cap},
                  {"authors_without_labels", set.authors_without_labels},
                  {"moves", moves.size()},
                  {"moves_before_filter", set.moves_before_filter},
                  {"station_cap", config.sketch.station_cap},
                  {"series", series_summary},
                  {"brain_circulation",
                   {{"returned", circulation.returned},
                    {"mobile", circulation.mobile},
                    {"total", circulation.total},
                    {"missing_country", circulation.missing_country}}}});
  log << "sketch: " << set.sketches.size() << " sketches, " << moves.size() << " moves, "
      << set.dropped_over_cap << " dropped over cap\n";
}

void run_fit(const PipelineConfig& config, std::ostream& log, const std::optional<fs::path>& only) {
  config.validate();
  if (only) {
    auto in = open_input(*only, "series file");
    std::vector<double> values;
    try {
      values = sketch::read_series(in);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string(e.what()) + " in " + only->string());
    }
    fit_and_write(config, only->stem().string(), values, log, true);
    return;
  }
  std::size_t fitted = 0;
  const auto names = series_names(config);
  for (const auto& name : names) {
    const auto values = read_series_file(series_path(config, name), "sketch");
    if (fit_and_write(config, name, values, log, false)) ++fitted;
  }
  log << "fit: " << fitted << "/" << names.size() << " series fitted\n";
}

void run_linkrank(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  std::vector<sketch::Move> moves;
  {
    auto in = open_artifact(config.out / kMoves, "sketch");
    moves = read_moves(in);
  }
  sketch::CityTable cities;
  {
    auto in = open_artifact(config.out / kCities, "ingest");
    cities = read_cities(in);
  }
  const auto graph = linkrank::build_migration_graph(moves);
  {
    auto out = open_output(config.out / "migration_graph.csv");
    linkrank::write_migration_graph(out, graph);
  }
  const auto frequency = linkrank::frequency_distribution(graph, config.min_count);
  {
    auto out = open_output(series_path(config, kFrequency));
    sketch::TimingSeries s;
    s.values = frequency;
    sketch::write_series(out, s);
  }
  fit_and_write(config, kFrequency, frequency, log, false);

  const auto hubs = linkrank::hits(graph, config.hits);
  const auto rank = linkrank::pagerank(graph, config.pagerank);
  const auto roles = linkrank::classify_cities(hubs.hub, hubs.authority, config.thresholds);
  const auto rankings = linkrank::rank_cities(graph, hubs, rank, roles);
  {
    auto out = open_output(config.out / kRankings);
    linkrank::write_rankings(out, rankings, cities);
  }
  {
    auto out = open_output(config.out / "geo.csv");
    linkrank::write_geo(out, rankings, cities);
  }
  write_json(config.out / "linkrank_summary.json",
             json{{"cities", graph.size()},
                  {"edges", graph.edges.size()},
                  {"total_moves", graph.total_weight()},
                  {"frequency_min_count", config.min_count},
                  {"frequency_n", frequency.size()},
                  {"hits_weighted", config.hits.weighted},
                  {"hits_iterations", hubs.iterations},
                  {"hits_converged", hubs.converged},
                  {"hits_no_edges", hubs.no_edges},
                  {"pagerank_damping", config.pagerank.damping},
                  {"pagerank_iterations", rank.iterations},
                  {"pagerank_converged", rank.converged}});
  log << "linkrank: " << graph.size() << " cities, " << graph.edges.size() << " edges, "
      << frequency.size() << " frequent links\n";
}

void run_report(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  json report;

  std::vector<sketch::YearRow> yearly;
  {
    auto in = open_artifact(config.out / kYearly, "sketch");
    yearly = read_yearly(in);
  }
  json yearly_json = json::array();
  for (const auto& r : yearly) {
    yearly_json.push_back({{"year", r.year},
                           {"publications", r.publications},
                           {"authors", r.authors},
                           {"moves", r.moves},
                           {"moves_per_author", r.moves_per_author}});
  }
  report["yearly"] = std::move(yearly_json);

  json fits = json::object();
  for (const auto& name : series_names(config)) {
    fits[name] = read_json(config.out / "fit" / (name + ".json"), "fit");
  }
  fits[kFrequency] = read_json(config.out / "fit" / (std::string(kFrequency) + ".json"), "linkrank");
  report["fits"] = fits;

  json rankings = json::array();
  {
    auto in = open_artifact(config.out / kRankings, "linkrank");
    csv::Reader reader(in);
    require_header(reader, {"city", "country", "hub", "authority", "pagerank", "role"}, kRankings);
    while (auto row = reader.next()) {
      const std::string at = where(kRankings, reader);
      if (row->size() != 6) throw DataError("wrong field count" + at);
      rankings.push_back(
          {{"city", (*row)[0]},
           {"country", (*row)[1]},
           {"hub", parse_field([&] { return csv::parse_double((*row)[2]); }, at)},
           {"authority", parse_field([&] { return csv::parse_double((*row)[3]); }, at)},
           {"pagerank", parse_field([&] { return csv::parse_double((*row)[4]); }, at)},
           {"role", (*row)[5]}});
    }
  }
  report["rankings"] = std::move(rankings);

  // Mean career timeline: years per move, to the k-th move, and until return.
  json timeline = json::object();
  const auto propensity = read_series_file(series_path(config, "propensity"), "sketch");
  timeline["mean_propensity"] = mean_or_null(propensity);
  json kth = json::object();
  for (int k = 2; k <= config.max_kth_move; ++k) {
    const std::string name = "kth_" + std::to_string(k);
    kth[std::to_string(k)] = mean_or_null(read_series_file(series_path(config, name), "sketch"));
  }
  timeline["mean_kth_move"] = std::move(kth);
  timeline["mean_brain_circulation"] =
      mean_or_null(read_series_file(series_path(config, "brain_circulation"), "sketch"));
  report["timeline"] = std::move(timeline);

  // Poisson-log-normal job market driven by the fitted propensity law: if
  // t ~ LogNormal(mu, s2) then the rate 1/t ~ LogNormal(-mu, s2).
  json simulation = {{"seed", config.seed},
                     {"researchers", config.simulated_researchers},
                     {"horizon", config.simulation_horizon}};
  const json& prop_fit = report["fits"]["propensity"];
  if (prop_fit.contains("families") && prop_fit["families"].contains("lognormal") &&
      prop_fit["families"]["lognormal"].contains("params")) {
    const json& p = prop_fit["families"]["lognormal"]["params"];
    const fit::PoissonLogNormalParams params{-p.at("mu").get<double>(), p.at("sigma2").get<double>()};
    const auto sample = fit::simulate_poisson_lognormal(params, config.simulated_researchers,
                                                        config.simulation_horizon, config.seed);
    double total = 0.0;
    for (auto c : sample.counts) total += static_cast<double>(c);
    simulation["rate_mu"] = params.mu;
    simulation["rate_sigma2"] = params.sigma2;
    simulation["events"] = sample.event_times.size();
    simulation["mean_count"] = total / static_cast<double>(sample.counts.size());
    simulation["expected_mean_count"] =
        std::exp(params.mu + params.sigma2 / 2.0) * config.simulation_horizon;
    if (sample.interarrivals.size() >= 2) {
      const auto expo = fit::fit_exponential(sample.interarrivals);
      const double mean_gap = 1.0 / expo.rate;
      simulation["interarrival_rate"] = expo.rate;
      simulation["memorylessness_deviation"] =
          fit::memorylessness_deviation(sample.interarrivals, mean_gap, mean_gap);
    }
  } else {
    simulation["skipped"] = "no log-normal fit for the propensity series";
  }
  report["simulation"] = std::move(simulation);

  write_json(config.out / "report.json", report);
  log << "report: " << (config.out / "report.json").string() << '\n';
}

void run_all(const PipelineConfig& config, std::ostream& log) {
  run_ingest(config, log);
  run_build_graph(config, log);
  run_propagate(config, log);
  run_sketch(config, log);
  run_fit(config, log);
  run_linkrank(config, log);
  run_report(config, log);
}

}  // namespace citymig::pipeline
