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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "citymig/graph.hpp"
#include "citymig/propagation.hpp"
#include "citymig/sketch.hpp"
#include "citymig/synthetic.hpp"

namespace citymig::synthetic {
namespace {

SyntheticOptions small_options() {
  SyntheticOptions o;
  o.authors = 2000;
  o.cities = 30;
  o.countries = 6;
  o.city_pairs = 60;
  o.seed = 7;
  return o;
}

std::string serialize(const SyntheticCorpus& c) {
  std::ostringstream out;
  ingest::write_corpus(out, c.records);
  write_gazetteer(out, c.gazetteer);
  return out.str();
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate(small_options());
  const auto b = generate(small_options());
  EXPECT_EQ(serialize(a), serialize(b));
  EXPECT_EQ(a.moves.size(), b.moves.size());
  auto other = small_options();
  other.seed = 8;
  EXPECT_NE(serialize(generate(other)), serialize(a));
}

TEST(Synthetic, ShapeOfCorpus) {
  const auto opts = small_options();
  const auto c = generate(opts);
  EXPECT_EQ(c.gazetteer.size(), 2 * opts.cities);
  std::map<std::string, std::size_t> papers_per_author;
  for (const auto& r : c.records) {
    ASSERT_EQ(r.authors.size(), 1u);
    ++papers_per_author[r.authors[0]];
    EXPECT_GE(r.year, 1900);
    EXPECT_LE(r.year, opts.last_year);
  }
  EXPECT_EQ(papers_per_author.size(), opts.authors);
  std::size_t stations = 0;
  for (const auto& [a, n] : papers_per_author) {
    ASSERT_EQ(n % 4, 0u);
    stations += n / 4;
  }
  EXPECT_EQ(stations - opts.authors, c.moves.size());
  for (const auto& m : c.moves) {
    EXPECT_NE(m.from, m.to);
    EXPECT_GE(m.gap, 1);
  }
  EXPECT_GT(c.mobile_authors, 0u);
}

TEST(Synthetic, PairCountsFollowStratifiedPareto) {
  const auto opts = small_options();
  const auto c = generate(opts);
  std::map<std::pair<std::string, std::string>, long long> counts;
  for (const auto& m : c.moves) ++counts[{m.from, m.to}];
  EXPECT_EQ(counts.size(), opts.city_pairs);
  // Each stratum's count is shared by the five edges of one city cycle.
  std::multiset<long long> expected, found;
  const std::size_t strata = opts.city_pairs / 5;
  for (std::size_t i = 0; i < strata; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(strata);
    const long long x = std::llround(opts.pair_xmin * std::pow(1.0 - u, -1.0 / (opts.pair_alpha - 1.0)));
    for (int k = 0; k < 5; ++k) expected.insert(x);
  }
  for (const auto& [pair, n] : counts) found.insert(n);
  EXPECT_EQ(found, expected);

  // Every city sends as many planted moves as it receives.
  std::map<std::string, long long> balance;
  for (const auto& m : c.moves) ++balance[m.from], --balance[m.to];
  for (const auto& [city, b] : balance) EXPECT_EQ(b, 0) << city;
}

TEST(Synthetic, PipelineRecoversPlantedMoves) {
  const auto c = generate(small_options());
  std::stringstream gaz;
  write_gazetteer(gaz, c.gazetteer);
  const auto gazetteer = ingest::Gazetteer::load_csv(gaz);
  const auto set = ingest::build_nodes(c.records, gazetteer);
  EXPECT_EQ(set.labeled_count() * 4, set.nodes.size() * 3);

  std::vector<CityId> ids;
  for (const auto& [id, city] : set.cities) ids.push_back(id);
  std::vector<std::optional<std::size_t>> seeds;
  for (const auto& n : set.nodes) {
    seeds.push_back(n.label ? std::optional<std::size_t>(std::lower_bound(ids.begin(), ids.end(), *n.label) - ids.begin())
                            : std::nullopt);
  }
  const auto w = graph::row_normalize(graph::build_graph(set.nodes, {}));
  const auto y = propagation::propagate(w, propagation::LabelMatrix::from_seeds(ids.size(), seeds), {});
  std::vector<std::optional<CityId>> labels;
  for (const auto& a : propagation::readout(y.labels)) {
    labels.push_back(a.label ? std::optional<CityId>(ids[*a.label]) : std::nullopt);
  }
  const auto sketches = sketch::extract_sketches(set.nodes, labels).sketches;
  const auto moves = sketch::all_moves(sketches);

  std::multiset<std::tuple<std::string, std::string>> planted, found;
  std::multiset<double> planted_gaps;
  for (const auto& m : c.moves) planted.insert({m.from, m.to}), planted_gaps.insert(m.gap);
  for (const auto& m : moves) found.insert({m.from, m.to});
  EXPECT_EQ(found, planted);
  const auto t = sketch::propensities(sketches).values;
  EXPECT_EQ(std::multiset<double>(t.begin(), t.end()), planted_gaps);
}

TEST(Synthetic, RejectsInfeasibleOptions) {
  auto o = small_options();
  o.authors = 10;
  EXPECT_THROW(generate(o), std::invalid_argument);
  o = small_options();
  o.city_pairs = o.cities * o.cities;
  EXPECT_THROW(generate(o), std::invalid_argument);
  o = small_options();
  o.gap_sigma = -1.0;
  EXPECT_THROW(generate(o), std::invalid_argument);
}

}  // namespace
}  // namespace citymig::synthetic
