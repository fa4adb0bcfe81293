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
#include <numeric>
#include <random>
#include <sstream>

#include "citymig/linkrank.hpp"
#include "support.hpp"

namespace citymig::linkrank {
namespace {

using sketch::Move;
using testing::kBlue;
using testing::kGreen;
using testing::kRed;

std::vector<Move> running_example_moves() {
  return {{"A1", kGreen, kRed, 2002, 1}, {"A2", kBlue, kRed, 2001, 1}, {"A2", kRed, kGreen, 2004, 2}};
}

std::vector<Move> edges_to_moves(std::initializer_list<std::tuple<const char*, const char*, int>> edges) {
  std::vector<Move> m;
  for (auto [from, to, w] : edges) {
    for (int i = 0; i < w; ++i) m.push_back({"x", from, to, 2000, 1});
  }
  return m;
}

TEST(MigrationGraph, RunningExample) {
  const auto g = build_migration_graph(running_example_moves());
  ASSERT_EQ(g.size(), 3u);
  const auto b = *g.index_of(kBlue), gr = *g.index_of(kGreen), r = *g.index_of(kRed);
  std::vector<Edge> expected{{gr, r, 1}, {b, r, 1}, {r, gr, 1}};
  std::sort(expected.begin(), expected.end(),
            [](const Edge& x, const Edge& y) { return std::pair(x.from, x.to) < std::pair(y.from, y.to); });
  EXPECT_EQ(g.edges, expected);
  EXPECT_FALSE(g.index_of("Nowhere|XX"));
}

TEST(MigrationGraph, EmptyAndCounting) {
  const auto empty = build_migration_graph(std::vector<Move>{});
  EXPECT_EQ(empty.size(), 0u);
  EXPECT_TRUE(empty.edges.empty());
  const auto g = build_migration_graph(edges_to_moves({{"u", "v", 2}}));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].weight, 2u);
  EXPECT_THROW(build_migration_graph(edges_to_moves({{"u", "u", 1}})), std::invalid_argument);
}

TEST(MigrationGraph, WeightIsConserved) {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> city(0, 30);
  std::vector<Move> moves;
  for (int i = 0; i < 2000; ++i) {
    const int a = city(rng);
    int b = city(rng);
    if (a == b) b = (b + 1) % 31;
    moves.push_back({"x", "c" + std::to_string(a), "c" + std::to_string(b), 2000, 1});
  }
  EXPECT_EQ(build_migration_graph(moves).total_weight(), moves.size());
}

TEST(Frequency, FiltersByMinimumCount) {
  const auto g = build_migration_graph(edges_to_moves({{"a", "b", 1}, {"a", "c", 2}, {"b", "c", 15}, {"c", "a", 40}}));
  auto f = frequency_distribution(g, 10);
  std::sort(f.begin(), f.end());
  EXPECT_EQ(f, (std::vector<double>{15, 40}));
  EXPECT_EQ(frequency_distribution(g, 0).size(), 4u);
}

TEST(Hits, StarAndDyads) {
  const auto star = build_migration_graph(edges_to_moves({{"a", "c", 1}, {"b", "c", 1}, {"d", "c", 1}}));
  const auto s = hits(star);
  const auto c = *star.index_of("c");
  EXPECT_EQ(std::max_element(s.authority.begin(), s.authority.end()) - s.authority.begin(),
            static_cast<std::ptrdiff_t>(c));
  for (const char* spoke : {"a", "b", "d"}) {
    EXPECT_NEAR(s.hub[*star.index_of(spoke)], 1.0 / std::sqrt(3.0), 1e-12);
  }
  EXPECT_EQ(s.hub[c], 0.0);

  const auto dyads = build_migration_graph(edges_to_moves({{"a", "b", 3}, {"c", "d", 3}}));
  const auto d = hits(dyads);
  EXPECT_NEAR(d.hub[*dyads.index_of("a")], d.hub[*dyads.index_of("c")], 1e-15);
  EXPECT_NEAR(d.authority[*dyads.index_of("b")], d.authority[*dyads.index_of("d")], 1e-15);
}

TEST(Hits, RunningExampleAuthorityTopIsRed) {
  const auto g = build_migration_graph(running_example_moves());
  const auto h = hits(g);
  EXPECT_TRUE(h.converged);
  const auto top = std::max_element(h.authority.begin(), h.authority.end()) - h.authority.begin();
  EXPECT_EQ(g.cities[static_cast<std::size_t>(top)], kRed);
}

TEST(Hits, NoEdgesGivesZeroScores) {
  MigrationGraph g;
  g.cities = {"a", "b"};
  const auto h = hits(g);
  EXPECT_TRUE(h.no_edges);
  EXPECT_EQ(h.hub, (std::vector<double>{0, 0}));
  EXPECT_EQ(h.authority, (std::vector<double>{0, 0}));
}

TEST(Hits, MatchesDenseEigenvectors) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testing::random_migration_graph(rng, 5 + static_cast<std::size_t>(trial) * 2, 0.3);
    if (g.edges.empty()) continue;
    const auto h = hits(g, {100000, 1e-14, true});
    const auto ref = testing::hits_reference(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(h.hub[i], ref.hub[static_cast<Eigen::Index>(i)], 1e-8);
      EXPECT_NEAR(h.authority[i], ref.authority[static_cast<Eigen::Index>(i)], 1e-8);
    }
    double hub_norm = 0.0, auth_norm = 0.0;
    for (double v : h.hub) hub_norm += v * v;
    for (double v : h.authority) auth_norm += v * v;
    EXPECT_NEAR(hub_norm, 1.0, 1e-12);
    EXPECT_NEAR(auth_norm, 1.0, 1e-12);
  }
}

TEST(Hits, RankingIsScaleInvariant) {
  std::mt19937_64 rng(73);
  auto g = testing::random_migration_graph(rng, 30, 0.2);
  const auto before = hits(g);
  for (auto& e : g.edges) e.weight *= 7;
  const auto after = hits(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(before.hub[i], after.hub[i], 1e-10);
    EXPECT_NEAR(before.authority[i], after.authority[i], 1e-10);
  }
}

TEST(Hits, BinaryModeIgnoresWeights) {
  const auto g = build_migration_graph(edges_to_moves({{"a", "b", 50}, {"c", "d", 1}}));
  const auto h = hits(g, {100, 1e-12, false});
  EXPECT_NEAR(h.hub[*g.index_of("a")], h.hub[*g.index_of("c")], 1e-12);
  const auto w = hits(g);
  EXPECT_GT(w.hub[*g.index_of("a")], w.hub[*g.index_of("c")]);
}

TEST(PageRank, TrivialGraphs) {
  MigrationGraph single;
  single.cities = {"a"};
  EXPECT_NEAR(pagerank(single).rank[0], 1.0, 1e-15);
  const auto cycle = build_migration_graph(edges_to_moves({{"a", "b", 1}, {"b", "a", 1}}));
  const auto r = pagerank(cycle).rank;
  EXPECT_NEAR(r[0], 0.5, 1e-12);
  EXPECT_NEAR(r[1], 0.5, 1e-12);
}

TEST(PageRank, MatchesDenseOracleAndBounds) {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial) * 2;
    const auto g = testing::random_migration_graph(rng, n, 0.15);
    const auto pr = pagerank(g);
    EXPECT_TRUE(pr.converged);
    const auto ref = testing::pagerank_reference(g, 0.85);
    const double sum = std::accumulate(pr.rank.begin(), pr.rank.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(pr.rank[i], ref[static_cast<Eigen::Index>(i)], 1e-8);
      EXPECT_GE(pr.rank[i], (1.0 - 0.85) / static_cast<double>(n) - 1e-15);
    }
  }
}

TEST(PageRank, RejectsBadDamping) {
  const auto g = build_migration_graph(running_example_moves());
  EXPECT_THROW(pagerank(g, {1.0}), std::invalid_argument);
  EXPECT_THROW(pagerank(g, {0.0}), std::invalid_argument);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(quantile(v, 0.0), 1.0);
  EXPECT_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.9), 3.7);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile(v, 1.5), std::invalid_argument);
}

TEST(Classify, RolesFollowThresholds) {
  std::vector<double> hub(20, 0.1), authority(20, 0.1);
  hub[0] = 0.9;
  authority[0] = 0.0;  // sender
  authority[1] = 0.9;  // receiver
  hub[2] = 0.8, authority[2] = 0.8;  // incubator
  const auto roles = classify_cities(hub, authority);
  EXPECT_EQ(roles[0], Role::kSender);
  EXPECT_EQ(roles[1], Role::kReceiver);
  EXPECT_EQ(roles[2], Role::kIncubator);
  for (std::size_t i = 3; i < 20; ++i) EXPECT_EQ(roles[i], Role::kNeutral);
  EXPECT_EQ(to_string(Role::kIncubator), "incubator");

  // All-zero scores never count as high.
  const std::vector<double> zeros(5, 0.0);
  for (auto r : classify_cities(zeros, zeros)) EXPECT_EQ(r, Role::kNeutral);
}

TEST(Classify, RaisingTheQuantileNeverAddsHighCities) {
  std::mt19937_64 rng(75);
  const auto g = testing::random_migration_graph(rng, 40, 0.1);
  const auto h = hits(g);
  auto high = [&](double q) {
    std::size_t n = 0;
    for (auto r : classify_cities(h.hub, h.authority, {q, q})) n += r != Role::kNeutral;
    return n;
  };
  std::size_t previous = high(0.0);
  for (double q : {0.25, 0.5, 0.75, 0.9, 1.0}) {
    const auto now = high(q);
    EXPECT_LE(now, previous);
    previous = now;
  }
}

TEST(Ranking, SortedByPageRankAndWritten) {
  const auto g = build_migration_graph(running_example_moves());
  const auto h = hits(g);
  const auto p = pagerank(g);
  const auto roles = classify_cities(h.hub, h.authority);
  const auto ranked = rank_cities(g, h, p, roles);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].city, kRed);
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].pagerank, ranked[i].pagerank);

  sketch::CityTable cities{{kRed, {kRed, "Rome", "IT", "Europe", 41.9, 12.5}}};
  std::ostringstream out;
  write_rankings(out, ranked, cities);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "city,country,hub,authority,pagerank,role");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("Rome,IT,", 0), 0u);
  std::getline(in, line);
  EXPECT_TRUE(line.rfind("Bonn,DE,", 0) == 0 || line.rfind("Boston,US,", 0) == 0) << line;

  std::ostringstream geo;
  write_geo(geo, ranked, cities);
  const auto geo_text = geo.str();
  EXPECT_EQ(std::count(geo_text.begin(), geo_text.end(), '\n'), 4);

  std::ostringstream edges;
  write_migration_graph(edges, g);
  const auto edge_text = edges.str();
  EXPECT_EQ(std::count(edge_text.begin(), edge_text.end(), '\n'), 4);
}

}  // namespace
}  // namespace citymig::linkrank
