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

#ifndef CITYMIG_SKETCH_HPP_
#define CITYMIG_SKETCH_HPP_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "citymig/ingest.hpp"
#include "citymig/types.hpp"

namespace citymig::sketch {

struct Station {
  int year = 0;
  CityId city;

  friend bool operator==(const Station&, const Station&) = default;
};

// Unique cities of one author in order of first appearance. Two cities can
// first appear in the same year, so years are non-decreasing.
struct MigrationSketch {
  AuthorId author;
  std::vector<Station> stations;

  friend bool operator==(const MigrationSketch&, const MigrationSketch&) = default;
};

struct Move {
  AuthorId author;
  CityId from;
  CityId to;
  int at_year = 0;  // first year at `to`
  int ordinal = 0;  // 1-based position in the author's sketch

  friend bool operator==(const Move&, const Move&) = default;
};

struct SketchOptions {
  // Sketches with more stations than this are dropped as likely
  // disambiguation errors.
  std::size_t station_cap = 10;
};

struct SketchSet {
  std::vector<MigrationSketch> sketches;
  std::size_t dropped_over_cap = 0;
  std::size_t authors_without_labels = 0;
  std::size_t moves_before_filter = 0;
};

// `labels[i]` is the city of node i (nullopt for unassigned nodes, which are
// skipped). Same-year ties are ordered by node id, i.e. paper id.
SketchSet extract_sketches(std::span<const ingest::AuthorPaperNode> nodes,
                           std::span<const std::optional<CityId>> labels,
                           const SketchOptions& options = {});

std::vector<Move> moves(const MigrationSketch& sketch);
std::vector<Move> all_moves(std::span<const MigrationSketch> sketches);

enum class SeriesKind {
  kPropensity,
  kKthMovePropensity,
  kBrainCirculation,
  kPooledInterarrival,
  kPooledWaiting,
};

std::string to_string(SeriesKind kind);

// Positive durations in years. Zero-length durations are not kept; they
// are counted in `zero_excluded`.
struct TimingSeries {
  SeriesKind kind = SeriesKind::kPropensity;
  std::optional<int> k;
  std::vector<double> values;
  std::size_t zero_excluded = 0;
};

// Year differences between consecutive stations, zeros included.
std::vector<int> author_propensities(const MigrationSketch& sketch);

// year(station k+1) - year(station 1), or nullopt with fewer than k moves.
std::optional<int> author_kth_move_propensity(const MigrationSketch& sketch, int k);

using CityTable = std::map<CityId, ingest::City>;

// Restricts propensities to moves leaving a continent and/or country.
struct OriginFilter {
  std::optional<std::string> continent;
  std::optional<std::string> country;

  bool empty() const { return !continent && !country; }
};

TimingSeries propensities(std::span<const MigrationSketch> sketches,
                          const OriginFilter& filter = {}, const CityTable* cities = nullptr);

// Throws std::invalid_argument for k < 2.
TimingSeries kth_move_propensities(std::span<const MigrationSketch> sketches, int k);

struct CirculationResult {
  TimingSeries series;
  std::size_t returned = 0;
  std::size_t mobile = 0;
  std::size_t total = 0;
  std::size_t missing_country = 0;
};

// Years from first leaving the country of station 1 until the first later
// station back in that country.
CirculationResult brain_circulation(std::span<const MigrationSketch> sketches,
                                    const std::map<CityId, std::string>& city_to_country);

struct PooledArrivals {
  TimingSeries interarrival;  // t'
  TimingSeries waiting;       // s'_k = t'_1 + ... + t'_k
};

// Gaps between consecutive move events pooled over all authors. With a
// baseline year the first gap is measured from it.
PooledArrivals pooled_arrivals(std::span<const Move> moves,
                               std::optional<int> baseline_year = std::nullopt);

struct YearRow {
  int year = 0;
  std::size_t publications = 0;
  std::size_t authors = 0;
  std::size_t moves = 0;
  double moves_per_author = 0.0;
};

std::vector<YearRow> yearly_stats(std::span<const ingest::PublicationRecord> records,
                                  std::span<const Move> moves);

// JSON lines `{"author": .., "stations": [{"year": .., "city": ..}]}`.
void write_sketches(std::ostream& out, std::span<const MigrationSketch> sketches);
std::vector<MigrationSketch> read_sketches(std::istream& in);

// One duration per line.
void write_series(std::ostream& out, const TimingSeries& series);
std::vector<double> read_series(std::istream& in);

}  // namespace citymig::sketch

#endif  // CITYMIG_SKETCH_HPP_
