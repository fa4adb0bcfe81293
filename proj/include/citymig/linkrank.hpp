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

#ifndef CITYMIG_LINKRANK_HPP_
#define CITYMIG_LINKRANK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "citymig/sketch.hpp"
#include "citymig/types.hpp"

namespace citymig::linkrank {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::uint64_t weight = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed city graph; edge weight = number of moves from -> to. Cities are
// sorted by id and edges by (from, to).
struct MigrationGraph {
  std::vector<CityId> cities;
  std::vector<Edge> edges;

  std::size_t size() const { return cities.size(); }
  std::optional<std::size_t> index_of(const CityId& city) const;
  std::uint64_t total_weight() const;
};

MigrationGraph build_migration_graph(std::span<const sketch::Move> moves);

// Edge weights >= min_count, in edge order.
std::vector<double> frequency_distribution(const MigrationGraph& graph,
                                           std::uint64_t min_count = 10);

struct HitsOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
  bool weighted = true;  // false collapses edges to 0/1
};

struct HitsResult {
  std::vector<double> hub;
  std::vector<double> authority;
  int iterations = 0;
  bool converged = false;
  bool no_edges = false;  // all scores are zero
};

// Power iteration a <- A^T h, h <- A a with L2 normalisation after each
// half-step, starting from the uniform unit vector.
HitsResult hits(const MigrationGraph& graph, const HitsOptions& options = {});

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 change
  int max_iterations = 1000;
  bool weighted = true;
};

struct PageRankResult {
  std::vector<double> rank;
  int iterations = 0;
  bool converged = false;
};

// Damped random walk over out-weights; cities without outgoing moves spread
// their mass uniformly.
PageRankResult pagerank(const MigrationGraph& graph, const PageRankOptions& options = {});

enum class Role { kNeutral, kSender, kReceiver, kIncubator };

std::string to_string(Role role);

// Linear-interpolation quantile of `values` at q in [0, 1].
double quantile(std::span<const double> values, double q);

struct RoleThresholds {
  double hub_quantile = 0.9;
  double authority_quantile = 0.9;
};

// A score is high when it reaches its quantile threshold and is positive.
// sender: high hub only; receiver: high authority only; incubator: both.
std::vector<Role> classify_cities(std::span<const double> hub, std::span<const double> authority,
                                  const RoleThresholds& thresholds = {});

struct CityRanking {
  CityId city;
  double hub = 0.0;
  double authority = 0.0;
  double pagerank = 0.0;
  Role role = Role::kNeutral;
};

// Sorted by pagerank descending, ties by city id.
std::vector<CityRanking> rank_cities(const MigrationGraph& graph, const HitsResult& hits,
                                     const PageRankResult& pagerank, std::span<const Role> roles);

// CSV `city,country,hub,authority,pagerank,role`. Names and countries come
// from `cities` when present, otherwise from the "<city>|<country>" id.
void write_rankings(std::ostream& out, std::span<const CityRanking> rankings,
                    const sketch::CityTable& cities);

// CSV `lat,lon,score,kind`, one row per city and score kind; cities without
// coordinates are skipped.
void write_geo(std::ostream& out, std::span<const CityRanking> rankings,
               const sketch::CityTable& cities);

// CSV `from,to,weight`.
void write_migration_graph(std::ostream& out, const MigrationGraph& graph);

}  // namespace citymig::linkrank

#endif  // CITYMIG_LINKRANK_HPP_
