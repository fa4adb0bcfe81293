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

#include "citymig/linkrank.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "citymig/csv.hpp"

namespace citymig::linkrank {

namespace {

double edge_weight(const Edge& e, bool weighted) {
  return weighted ? static_cast<double>(e.weight) : 1.0;
}

// Scales v to unit L2 norm; returns false when v is zero.
bool normalize_l2(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (!(ss > 0.0)) return false;
  const double norm = std::sqrt(ss);
  for (double& x : v) x /= norm;
  return true;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::pair<std::string, std::string> split_city_id(const CityId& id) {
  const auto bar = id.find('|');
  if (bar == std::string::npos) return {id, ""};
  return {id.substr(0, bar), id.substr(bar + 1)};
}

}  // namespace

std::optional<std::size_t> MigrationGraph::index_of(const CityId& city) const {
  const auto it = std::lower_bound(cities.begin(), cities.end(), city);
  if (it == cities.end() || *it != city) return std::nullopt;
  return static_cast<std::size_t>(it - cities.begin());
}

std::uint64_t MigrationGraph::total_weight() const {
  std::uint64_t total = 0;
  for (const auto& e : edges) total += e.weight;
  return total;
}

MigrationGraph build_migration_graph(std::span<const sketch::Move> moves) {
  MigrationGraph graph;
  for (const auto& m : moves) {
    graph.cities.push_back(m.from);
    graph.cities.push_back(m.to);
  }
  std::sort(graph.cities.begin(), graph.cities.end());
  graph.cities.erase(std::unique(graph.cities.begin(), graph.cities.end()), graph.cities.end());

  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;
  for (const auto& m : moves) {
    if (m.from == m.to) throw std::invalid_argument("move " + m.author + " is a self-loop");
    ++counts[{*graph.index_of(m.from), *graph.index_of(m.to)}];
  }
  graph.edges.reserve(counts.size());
  for (const auto& [key, weight] : counts) graph.edges.push_back({key.first, key.second, weight});
  return graph;
}

std::vector<double> frequency_distribution(const MigrationGraph& graph, std::uint64_t min_count) {
  std::vector<double> out;
  for (const auto& e : graph.edges) {
    if (e.weight >= min_count) out.push_back(static_cast<double>(e.weight));
  }
  return out;
}

HitsResult hits(const MigrationGraph& graph, const HitsOptions& options) {
  if (options.max_iterations < 1 || !(options.tolerance >= 0.0)) {
    throw std::invalid_argument("HITS needs max_iterations >= 1 and tolerance >= 0");
  }
  const std::size_t n = graph.size();
  HitsResult out;
  out.hub.assign(n, 0.0);
  out.authority.assign(n, 0.0);
  if (n == 0 || graph.edges.empty()) {
    out.no_edges = true;
    out.converged = true;
    return out;
  }
  std::vector<double> h(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> a(n, 0.0);
  std::vector<double> a_next(n), h_next(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    std::fill(a_next.begin(), a_next.end(), 0.0);
    for (const auto& e : graph.edges) a_next[e.to] += edge_weight(e, options.weighted) * h[e.from];
    normalize_l2(a_next);
    std::fill(h_next.begin(), h_next.end(), 0.0);
    for (const auto& e : graph.edges) {
      h_next[e.from] += edge_weight(e, options.weighted) * a_next[e.to];
    }
    normalize_l2(h_next);
    const double change = std::max(max_abs_diff(a, a_next), max_abs_diff(h, h_next));
    a.swap(a_next);
    h.swap(h_next);
    out.iterations = it;
    if (change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.hub = std::move(h);
  out.authority = std::move(a);
  return out;
}

PageRankResult pagerank(const MigrationGraph& graph, const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1)");
  }
  if (options.max_iterations < 1 || !(options.tolerance >= 0.0)) {
    throw std::invalid_argument("PageRank needs max_iterations >= 1 and tolerance >= 0");
  }
  const std::size_t n = graph.size();
  PageRankResult out;
  if (n == 0) {
    out.converged = true;
    return out;
  }
  const double dn = static_cast<double>(n);
  std::vector<double> out_weight(n, 0.0);
  for (const auto& e : graph.edges) out_weight[e.from] += edge_weight(e, options.weighted);

  std::vector<double> r(n, 1.0 / dn);
  std::vector<double> next(n);
  const double d = options.damping;
  for (int it = 1; it <= options.max_iterations; ++it) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_weight[i] == 0.0) dangling += r[i];
    }
    const double base = (1.0 - d) / dn + d * dangling / dn;
    std::fill(next.begin(), next.end(), base);
    for (const auto& e : graph.edges) {
      next[e.to] += d * r[e.from] * edge_weight(e, options.weighted) / out_weight[e.from];
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - r[i]);
    r.swap(next);
    out.iterations = it;
    if (change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  double total = 0.0;
  for (double x : r) total += x;
  for (double& x : r) x /= total;
  out.rank = std::move(r);
  return out;
}

std::string to_string(Role role) {
  switch (role) {
    case Role::kNeutral: return "neutral";
    case Role::kSender: return "sender";
    case Role::kReceiver: return "receiver";
    case Role::kIncubator: return "incubator";
  }
  return "neutral";
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<Role> classify_cities(std::span<const double> hub, std::span<const double> authority,
                                  const RoleThresholds& thresholds) {
  if (hub.size() != authority.size()) {
    throw std::invalid_argument("hub and authority vectors differ in length");
  }
  std::vector<Role> roles(hub.size(), Role::kNeutral);
  if (hub.empty()) return roles;
  const double th = quantile(hub, thresholds.hub_quantile);
  const double ta = quantile(authority, thresholds.authority_quantile);
  for (std::size_t i = 0; i < hub.size(); ++i) {
    const bool high_hub = hub[i] >= th && hub[i] > 0.0;
    const bool high_auth = authority[i] >= ta && authority[i] > 0.0;
    if (high_hub && high_auth) roles[i] = Role::kIncubator;
    else if (high_hub) roles[i] = Role::kSender;
    else if (high_auth) roles[i] = Role::kReceiver;
  }
  return roles;
}

std::vector<CityRanking> rank_cities(const MigrationGraph& graph, const HitsResult& hits,
                                     const PageRankResult& pagerank, std::span<const Role> roles) {
  const std::size_t n = graph.size();
  if (hits.hub.size() != n || hits.authority.size() != n || pagerank.rank.size() != n ||
      roles.size() != n) {
    throw std::invalid_argument("score vectors do not match the graph size");
  }
  std::vector<CityRanking> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({graph.cities[i], hits.hub[i], hits.authority[i], pagerank.rank[i], roles[i]});
  }
  std::sort(out.begin(), out.end(), [](const CityRanking& a, const CityRanking& b) {
    if (a.pagerank != b.pagerank) return a.pagerank > b.pagerank;
    return a.city < b.city;
  });
  return out;
}

void write_rankings(std::ostream& out, std::span<const CityRanking> rankings,
                    const sketch::CityTable& cities) {
  csv::write_row(out, {"city", "country", "hub", "authority", "pagerank", "role"});
  for (const auto& r : rankings) {
    auto [name, country] = split_city_id(r.city);
    if (const auto it = cities.find(r.city); it != cities.end()) {
      name = it->second.name;
      country = it->second.country;
    }
    csv::write_row(out, {name, country, csv::format_double(r.hub),
                         csv::format_double(r.authority), csv::format_double(r.pagerank),
                         to_string(r.role)});
  }
}

void write_geo(std::ostream& out, std::span<const CityRanking> rankings,
               const sketch::CityTable& cities) {
  csv::write_row(out, {"lat", "lon", "score", "kind"});
  for (const auto& r : rankings) {
    const auto it = cities.find(r.city);
    if (it == cities.end()) continue;
    const std::string lat = csv::format_double(it->second.latitude);
    const std::string lon = csv::format_double(it->second.longitude);
    csv::write_row(out, {lat, lon, csv::format_double(r.hub), "hub"});
    csv::write_row(out, {lat, lon, csv::format_double(r.authority), "authority"});
    csv::write_row(out, {lat, lon, csv::format_double(r.pagerank), "pagerank"});
  }
}

void write_migration_graph(std::ostream& out, const MigrationGraph& graph) {
  csv::write_row(out, {"from", "to", "weight"});
  for (const auto& e : graph.edges) {
    csv::write_row(out, {graph.cities[e.from], graph.cities[e.to], std::to_string(e.weight)});
  }
}

}  // namespace citymig::linkrank
