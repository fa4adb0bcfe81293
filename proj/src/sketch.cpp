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

#include "citymig/sketch.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "citymig/csv.hpp"
#include "citymig/error.hpp"
#include "json.hpp"

namespace citymig::sketch {

SketchSet extract_sketches(std::span<const ingest::AuthorPaperNode> nodes,
                           std::span<const std::optional<CityId>> labels,
                           const SketchOptions& options) {
  if (labels.size() != nodes.size()) {
    throw std::invalid_argument("labels and nodes differ in length");
  }
  std::map<std::string_view, std::vector<std::size_t>> by_author;
  for (std::size_t i = 0; i < nodes.size(); ++i) by_author[nodes[i].author].push_back(i);

  SketchSet out;
  for (auto& [author, idx] : by_author) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (nodes[a].year != nodes[b].year) return nodes[a].year < nodes[b].year;
      return nodes[a].id < nodes[b].id;
    });
    MigrationSketch sk{std::string(author), {}};
    std::unordered_set<std::string_view> seen;
    for (std::size_t i : idx) {
      if (!labels[i]) continue;
      if (seen.insert(*labels[i]).second) sk.stations.push_back({nodes[i].year, *labels[i]});
    }
    if (sk.stations.empty()) {
      ++out.authors_without_labels;
      continue;
    }
    out.moves_before_filter += sk.stations.size() - 1;
    if (sk.stations.size() > options.station_cap) {
      ++out.dropped_over_cap;
      continue;
    }
    out.sketches.push_back(std::move(sk));
  }
  return out;
}

std::vector<Move> moves(const MigrationSketch& sketch) {
  std::vector<Move> out;
  for (std::size_t s = 1; s < sketch.stations.size(); ++s) {
    out.push_back({sketch.author, sketch.stations[s - 1].city, sketch.stations[s].city,
                   sketch.stations[s].year, static_cast<int>(s)});
  }
  return out;
}

std::vector<Move> all_moves(std::span<const MigrationSketch> sketches) {
  std::vector<Move> out;
  for (const auto& sk : sketches) {
    auto m = moves(sk);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kPropensity: return "propensity";
    case SeriesKind::kKthMovePropensity: return "kth_move_propensity";
    case SeriesKind::kBrainCirculation: return "brain_circulation";
    case SeriesKind::kPooledInterarrival: return "pooled_interarrival";
    case SeriesKind::kPooledWaiting: return "pooled_waiting";
  }
  return "unknown";
}

std::vector<int> author_propensities(const MigrationSketch& sketch) {
  std::vector<int> out;
  for (std::size_t s = 1; s < sketch.stations.size(); ++s) {
    out.push_back(sketch.stations[s].year - sketch.stations[s - 1].year);
  }
  return out;
}

std::optional<int> author_kth_move_propensity(const MigrationSketch& sketch, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (sketch.stations.size() < static_cast<std::size_t>(k) + 1) return std::nullopt;
  return sketch.stations[static_cast<std::size_t>(k)].year - sketch.stations.front().year;
}

namespace {

void push_duration(TimingSeries& series, int years) {
  if (years > 0) {
    series.values.push_back(static_cast<double>(years));
  } else {
    ++series.zero_excluded;
  }
}

}  // namespace

TimingSeries propensities(std::span<const MigrationSketch> sketches, const OriginFilter& filter,
                          const CityTable* cities) {
  if (!filter.empty() && cities == nullptr) {
    throw std::invalid_argument("origin filter needs a city table");
  }
  TimingSeries series{SeriesKind::kPropensity, std::nullopt, {}, 0};
  for (const auto& sk : sketches) {
    for (std::size_t s = 1; s < sk.stations.size(); ++s) {
      if (!filter.empty()) {
        auto it = cities->find(sk.stations[s - 1].city);
        if (it == cities->end()) continue;
        if (filter.continent && it->second.continent != *filter.continent) continue;
        if (filter.country && it->second.country != *filter.country) continue;
      }
      push_duration(series, sk.stations[s].year - sk.stations[s - 1].year);
    }
  }
  return series;
}

TimingSeries kth_move_propensities(std::span<const MigrationSketch> sketches, int k) {
  if (k < 2) throw std::invalid_argument("k-th move propensity needs k >= 2");
  TimingSeries series{SeriesKind::kKthMovePropensity, k, {}, 0};
  for (const auto& sk : sketches) {
    if (auto s = author_kth_move_propensity(sk, k)) push_duration(series, *s);
  }
  return series;
}

CirculationResult brain_circulation(std::span<const MigrationSketch> sketches,
                                    const std::map<CityId, std::string>& city_to_country) {
  CirculationResult out;
  out.series.kind = SeriesKind::kBrainCirculation;
  out.total = sketches.size();
  for (const auto& sk : sketches) {
    if (sk.stations.size() < 2) continue;
    ++out.mobile;
    std::vector<const std::string*> countries;
    bool missing = false;
    for (const auto& st : sk.stations) {
      auto it = city_to_country.find(st.city);
      if (it == city_to_country.end()) {
        missing = true;
        break;
      }
      countries.push_back(&it->second);
    }
    if (missing) {
      ++out.missing_country;
      continue;
    }
    const std::string& home = *countries.front();
    std::size_t departure = 0;
    for (std::size_t s = 1; s < countries.size(); ++s) {
      if (departure == 0 && *countries[s] != home) {
        departure = s;
      } else if (departure != 0 && *countries[s] == home) {
        ++out.returned;
        push_duration(out.series, sk.stations[s].year - sk.stations[departure].year);
        break;
      }
    }
  }
  return out;
}

PooledArrivals pooled_arrivals(std::span<const Move> moves, std::optional<int> baseline_year) {
  std::vector<int> events;
  events.reserve(moves.size() + 1);
  if (baseline_year) events.push_back(*baseline_year);
  for (const auto& m : moves) events.push_back(m.at_year);
  std::sort(events.begin(), events.end());

  PooledArrivals out;
  out.interarrival.kind = SeriesKind::kPooledInterarrival;
  out.waiting.kind = SeriesKind::kPooledWaiting;
  double elapsed = 0.0;
  for (std::size_t e = 1; e < events.size(); ++e) {
    const int gap = events[e] - events[e - 1];
    push_duration(out.interarrival, gap);
    if (gap > 0) {
      elapsed += gap;
      out.waiting.values.push_back(elapsed);
    }
  }
  out.waiting.zero_excluded = out.interarrival.zero_excluded;
  return out;
}

std::vector<YearRow> yearly_stats(std::span<const ingest::PublicationRecord> records,
                                  std::span<const Move> moves) {
  std::map<int, YearRow> rows;
  std::map<int, std::set<std::string_view>> authors;
  for (const auto& rec : records) {
    auto& row = rows[rec.year];
    row.year = rec.year;
    ++row.publications;
    auto& set = authors[rec.year];
    for (const auto& a : rec.authors) set.insert(a);
  }
  for (const auto& m : moves) {
    auto& row = rows[m.at_year];
    row.year = m.at_year;
    ++row.moves;
  }
  std::vector<YearRow> out;
  for (auto& [year, row] : rows) {
    row.authors = authors[year].size();
    row.moves_per_author =
        row.authors == 0 ? 0.0 : static_cast<double>(row.moves) / static_cast<double>(row.authors);
    out.push_back(row);
  }
  return out;
}

void write_sketches(std::ostream& out, std::span<const MigrationSketch> sketches) {
  for (const auto& sk : sketches) {
    nlohmann::json stations = nlohmann::json::array();
    for (const auto& st : sk.stations) stations.push_back({{"year", st.year}, {"city", st.city}});
    out << nlohmann::json{{"author", sk.author}, {"stations", stations}}.dump() << '\n';
  }
}

std::vector<MigrationSketch> read_sketches(std::istream& in) {
  std::vector<MigrationSketch> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      MigrationSketch sk{obj.at("author").get<std::string>(), {}};
      for (const auto& st : obj.at("stations")) {
        sk.stations.push_back({st.at("year").get<int>(), st.at("city").get<std::string>()});
      }
      out.push_back(std::move(sk));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad sketch on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_series(std::ostream& out, const TimingSeries& series) {
  for (double v : series.values) out << csv::format_double(v) << '\n';
}

std::vector<double> read_series(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(csv::parse_double(line));
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string(e.what()) + " on series line " + std::to_string(line_no));
    }
  }
  return out;
}

}  // namespace citymig::sketch
