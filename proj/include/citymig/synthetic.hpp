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

#ifndef CITYMIG_SYNTHETIC_HPP_
#define CITYMIG_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "citymig/ingest.hpp"

namespace citymig::synthetic {

// Generator for corpora with planted migration regularities: move gaps are
// rounded log-normal draws and per-pair move counts are rounded Pareto
// draws. Both use stratified inverse-CDF sampling (u_i = (i - 0.5) / N,
// shuffled) so the planted laws are not blurred by sampling noise. Pair
// counts are drawn once per directed 5-cycle of cities and shared by its
// edges.
struct SyntheticOptions {
  std::size_t authors = 5000;
  std::size_t cities = 100;
  std::size_t countries = 20;
  std::size_t city_pairs = 400;
  double pair_alpha = 2.5;
  double pair_xmin = 10.0;
  double gap_mu = 2.3;
  double gap_sigma = 0.4;
  int max_moves_per_author = 5;
  int first_year = 1950;
  int last_start_year = 1990;
  int last_year = 2095;
  // Seeded papers per station; one extra unlabeled paper is added per station.
  int seeded_papers = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GazetteerRow {
  std::string key;
  ingest::City city;
};

struct PlantedMove {
  std::string from;
  std::string to;
  int gap = 0;
};

struct SyntheticCorpus {
  std::vector<ingest::PublicationRecord> records;
  std::vector<GazetteerRow> gazetteer;
  std::vector<PlantedMove> moves;
  std::size_t mobile_authors = 0;
};

SyntheticCorpus generate(const SyntheticOptions& options);

// CSV `key,city,country,continent,lat,lon`.
void write_gazetteer(std::ostream& out, const std::vector<GazetteerRow>& rows);

}  // namespace citymig::synthetic

#endif  // CITYMIG_SYNTHETIC_HPP_
