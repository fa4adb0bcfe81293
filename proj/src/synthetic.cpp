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

#include "citymig/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "citymig/csv.hpp"

namespace citymig::synthetic {

namespace {

std::string padded(const char* prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
  return buf;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  std::shuffle(v.begin(), v.end(), rng);
}

constexpr std::size_t kCycleLength = 5;

struct Trail {
  std::vector<std::size_t> cities;
};

}  // namespace

void SyntheticOptions::validate() const {
  if (authors == 0 || cities < 2 || countries == 0 || countries > cities) {
    throw std::invalid_argument("synthetic corpus needs authors >= 1 and 1 <= countries <= cities");
  }
  if (city_pairs > cities * (cities - 1)) {
    throw std::invalid_argument("more city pairs requested than ordered pairs exist");
  }
  if (!(pair_alpha > 1.0) || !(pair_xmin >= 1.0) || !(gap_sigma > 0.0) ||
      max_moves_per_author < 1 || seeded_papers < 1 || first_year > last_start_year ||
      last_start_year >= last_year) {
    throw std::invalid_argument("invalid synthetic corpus options");
  }
}

SyntheticCorpus generate(const SyntheticOptions& options) {
  options.validate();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SyntheticCorpus corpus;

  // Cities and gazetteer: two institution spellings per city plus the
  // auto-registered "<city>, <country>" key.
  std::vector<ingest::City> cities;
  for (std::size_t c = 0; c < options.cities; ++c) {
    ingest::City city;
    city.name = padded("City", c, 3);
    const std::size_t country = c % options.countries;
    city.country = padded("Country", country, 2);
    city.continent = padded("Continent", country % 5, 1);
    city.latitude = std::round((unit(rng) * 160.0 - 80.0) * 1e4) / 1e4;
    city.longitude = std::round((unit(rng) * 340.0 - 170.0) * 1e4) / 1e4;
    city.id = ingest::make_city_id(city.name, city.country);
    corpus.gazetteer.push_back({"University of " + city.name, city});
    corpus.gazetteer.push_back({city.name + " Institute of Technology", city});
    cities.push_back(std::move(city));
  }

  // Stratified Pareto move counts, one per directed city cycle; every edge
  // of a cycle carries the same count so each city sends as many moves as
  // it receives and the tokens chain into multi-move trails.
  const std::size_t cycle_length = std::min<std::size_t>(kCycleLength, options.cities);
  const std::size_t strata = (options.city_pairs + cycle_length - 1) / cycle_length;
  std::vector<long long> stratum_counts;
  for (std::size_t i = 0; i < strata; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(strata);
    const double x = options.pair_xmin * std::pow(1.0 - u, -1.0 / (options.pair_alpha - 1.0));
    stratum_counts.push_back(std::llround(x));
  }
  shuffle(stratum_counts, rng);

  std::set<std::pair<std::size_t, std::size_t>> pair_set;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<long long> pair_counts;
  std::vector<std::size_t> order(options.cities);
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  for (std::size_t i = 0; i < strata; ++i) {
    const std::size_t length = std::min(cycle_length, options.city_pairs - pairs.size());
    std::vector<std::pair<std::size_t, std::size_t>> cycle;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) {
        throw std::invalid_argument("cannot place " + std::to_string(options.city_pairs) +
                                    " distinct city pairs; lower --city-pairs");
      }
      shuffle(order, rng);
      cycle.clear();
      // A short last cycle is an open path, or a 2-cycle when length is 2.
      const std::size_t nodes = length == cycle_length || length == 2 ? length : length + 1;
      for (std::size_t k = 0; k < length; ++k) cycle.emplace_back(order[k], order[(k + 1) % nodes]);
      if (std::none_of(cycle.begin(), cycle.end(), [&](const auto& e) { return pair_set.count(e); })) break;
    }
    for (const auto& e : cycle) {
      pair_set.insert(e);
      pairs.push_back(e);
      pair_counts.push_back(stratum_counts[i]);
    }
  }

  // One token per planted move, grouped by origin.
  std::vector<std::vector<std::size_t>> outgoing(options.cities);
  std::vector<std::size_t> origins;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (long long k = 0; k < pair_counts[i]; ++k) {
      outgoing[pairs[i].first].push_back(pairs[i].second);
      origins.push_back(pairs[i].first);
    }
  }
  for (auto& v : outgoing) shuffle(v, rng);
  shuffle(origins, rng);

  // Chain tokens into author trails with pairwise distinct cities.
  std::uniform_int_distribution<int> trail_cap(1, options.max_moves_per_author);
  std::vector<Trail> trails;
  for (std::size_t start : origins) {
    if (outgoing[start].empty()) continue;
    Trail trail{{start}};
    const int cap = trail_cap(rng);
    std::size_t cur = start;
    while (static_cast<int>(trail.cities.size()) - 1 < cap) {
      auto& out = outgoing[cur];
      auto it = std::find_if(out.rbegin(), out.rend(), [&](std::size_t to) {
        return std::find(trail.cities.begin(), trail.cities.end(), to) == trail.cities.end();
      });
      if (it == out.rend()) break;
      const std::size_t to = *it;
      out.erase(std::next(it).base());
      trail.cities.push_back(to);
      cur = to;
    }
    trails.push_back(std::move(trail));
  }
  if (trails.size() > options.authors) {
    throw std::invalid_argument("planted moves need " + std::to_string(trails.size()) +
                                " mobile authors but only " + std::to_string(options.authors) +
                                " are available");
  }

  std::uniform_int_distribution<std::size_t> pick_city(0, options.cities - 1);

  // Stratified log-normal gaps, rounded to whole years (at least one).
  std::size_t total_moves = 0;
  for (const auto& t : trails) total_moves += t.cities.size() - 1;
  const boost::math::normal_distribution<double> standard;
  std::vector<int> gaps;
  gaps.reserve(total_moves);
  for (std::size_t i = 0; i < total_moves; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(total_moves);
    const double z = boost::math::quantile(standard, u);
    const double x = std::exp(options.gap_mu + options.gap_sigma * z);
    gaps.push_back(std::max(1, static_cast<int>(std::lround(x))));
  }
  shuffle(gaps, rng);

  // Stationary authors fill the remaining budget.
  std::uniform_int_distribution<int> start_year(options.first_year, options.last_start_year);
  while (trails.size() < options.authors) trails.push_back(Trail{{pick_city(rng)}});
  shuffle(trails, rng);

  std::size_t next_gap = 0;
  for (std::size_t a = 0; a < trails.size(); ++a) {
    const std::string author = padded("a", a, 5);
    const auto& trail = trails[a];
    std::vector<int> years{start_year(rng)};
    for (std::size_t s = 1; s < trail.cities.size(); ++s) {
      const int gap = gaps[next_gap++];
      years.push_back(years.back() + gap);
      corpus.moves.push_back(
          {cities[trail.cities[s - 1]].id, cities[trail.cities[s]].id, gap});
    }
    if (years.back() > options.last_year) {
      const int shift = std::min(years.back() - options.last_year, years.front() - 1900);
      for (int& y : years) y -= shift;
    }
    if (trail.cities.size() > 1) ++corpus.mobile_authors;

    for (std::size_t s = 0; s < trail.cities.size(); ++s) {
      const ingest::City& city = cities[trail.cities[s]];
      for (int p = 0; p <= options.seeded_papers; ++p) {
        ingest::PublicationRecord rec;
        rec.paper_id = author + "-" + padded("s", s, 2) + "-" + padded("p", static_cast<std::size_t>(p), 2);
        rec.year = years[s];
        rec.authors = {author};
        if (p < options.seeded_papers) {
          // Alternate spellings and add e-mail noise so lookups go through
          // normalisation.
          std::string text = p % 2 == 0 ? "University of " + city.name + "."
                                        : city.name + " Institute of Technology";
          if (p == 0) text = "University of " + city.name + " " + author + "@example.org";
          rec.raw_affiliations.push_back({author, text});
        }
        corpus.records.push_back(std::move(rec));
      }
    }
  }
  return corpus;
}

void write_gazetteer(std::ostream& out, const std::vector<GazetteerRow>& rows) {
  csv::write_row(out, {"key", "city", "country", "continent", "lat", "lon"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.key, r.city.name, r.city.country, r.city.continent,
                         csv::format_double(r.city.latitude), csv::format_double(r.city.longitude)});
  }
}

}  // namespace citymig::synthetic
