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

#ifndef CITYMIG_INGEST_HPP_
#define CITYMIG_INGEST_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citymig/types.hpp"

namespace citymig::ingest {

struct AffiliationSeed {
  AuthorId author;
  std::string text;
};

struct PublicationRecord {
  PaperId paper_id;
  int year = 0;
  std::vector<AuthorId> authors;
  std::vector<AffiliationSeed> raw_affiliations;
};

struct City {
  CityId id;
  std::string name;
  std::string country;
  std::string continent;
  double latitude = 0.0;
  double longitude = 0.0;

  friend bool operator==(const City&, const City&) = default;
};

CityId make_city_id(std::string_view name, std::string_view country);

// Cleanup applied to affiliation strings before gazetteer lookup. The
// defaults drop department noise such as e-mail addresses and punctuation.
struct NormalizationPolicy {
  bool lowercase = true;
  bool strip_emails = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;

  std::string id() const;
};

std::string normalize_affiliation(std::string_view text,
                                  const NormalizationPolicy& policy = {});

// Pluggable affiliation -> city resolver. Implementations must be
// deterministic: the same string always yields the same answer.
class CityLookup {
 public:
  virtual ~CityLookup() = default;
  virtual std::optional<City> lookup(std::string_view affiliation) const = 0;
};

// File-backed lookup table keyed by normalized affiliation strings.
class Gazetteer : public CityLookup {
 public:
  explicit Gazetteer(NormalizationPolicy policy = {}) : policy_(policy) {}

  // CSV with header `key,city,country,continent,lat,lon`. Throws DataError.
  static Gazetteer load_csv(std::istream& in, NormalizationPolicy policy = {});

  // Registers `key` for `city`. Also registers the canonical key
  // "<name>, <country>" unless an explicit key already claims it.
  void add(std::string_view key, const City& city);

  std::optional<City> lookup(std::string_view affiliation) const override;

  const std::map<CityId, City>& cities() const { return cities_; }
  std::size_t key_count() const { return keys_.size(); }
  const NormalizationPolicy& policy() const { return policy_; }

 private:
  NormalizationPolicy policy_;
  std::map<CityId, City> cities_;
  std::unordered_map<std::string, CityId> keys_;
  std::set<std::string> canonical_keys_;
};

// Memoizes a slower resolver (for example a remote geocoding client).
class CachingLookup : public CityLookup {
 public:
  explicit CachingLookup(const CityLookup& backend) : backend_(backend) {}
  std::optional<City> lookup(std::string_view affiliation) const override;
  std::size_t backend_calls() const;

 private:
  const CityLookup& backend_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::optional<City>> cache_;
  mutable std::size_t backend_calls_ = 0;
};

// A miss is a value, not an error.
std::optional<City> resolve_city(std::string_view affiliation,
                                 const CityLookup& lookup);

// ---------------------------------------------------------------------------
// Corpus parsing

struct ParseOptions {
  int min_year = 1900;
  int max_year = 2100;
};

struct SkipEntry {
  std::size_t line_number = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<PublicationRecord> records;
  std::vector<SkipEntry> skips;
};

class CorpusReader {
 public:
  virtual ~CorpusReader() = default;
  virtual ParseResult read(std::istream& in, const ParseOptions& options) const = 0;
};

// One JSON object per line:
//   {"paper_id": .., "year": .., "authors": [..],
//    "affiliations": [{"author": .., "text": ..}]}
class JsonLinesReader : public CorpusReader {
 public:
  ParseResult read(std::istream& in, const ParseOptions& options) const override;
};

// DBLP-style XML: publication elements with a `key` attribute and nested
// <author> and <year> elements. Affiliations are not part of DBLP.
class DblpXmlReader : public CorpusReader {
 public:
  ParseResult read(std::istream& in, const ParseOptions& options) const override;
};

// Picks the reader by file extension (.xml -> DBLP, anything else -> JSONL).
std::unique_ptr<CorpusReader> reader_for(const std::filesystem::path& path);

ParseResult parse_corpus(std::istream& in, const ParseOptions& options = {});

// Writes records in the JSON lines format read by JsonLinesReader.
void write_corpus(std::ostream& out, std::span<const PublicationRecord> records);

void write_skip_report(std::ostream& out, std::span<const SkipEntry> skips);

// Seed affiliations supplied separately from the corpus:
// CSV `paper_id,author,text`.
struct SeedRow {
  PaperId paper_id;
  AuthorId author;
  std::string text;
};

std::vector<SeedRow> load_seeds_csv(std::istream& in);

// Appends seeds to the matching records. Returns the number of rows whose
// (paper, author) pair does not exist in the corpus.
std::size_t attach_seeds(std::vector<PublicationRecord>& records,
                         std::span<const SeedRow> seeds);

// ---------------------------------------------------------------------------
// Author-paper nodes

struct AuthorPaperNode {
  NodeId id = 0;
  AuthorId author;
  PaperId paper;
  int year = 0;
  std::optional<CityId> label;

  friend bool operator==(const AuthorPaperNode&, const AuthorPaperNode&) = default;
};

struct SeedConflict {
  AuthorId author;
  PaperId paper;
  CityId kept;
  CityId rejected;
};

struct NodeSet {
  std::vector<AuthorPaperNode> nodes;
  // Cities referenced by at least one seed label, keyed by id.
  std::map<CityId, City> cities;
  std::size_t seeds_resolved = 0;
  std::size_t seeds_missed = 0;
  std::vector<SeedConflict> conflicts;

  std::size_t labeled_count() const;
};

// One node per (author, paper) pair, ids in sorted (author, paper) order.
NodeSet build_nodes(std::span<const PublicationRecord> records,
                    const CityLookup& lookup);

}  // namespace citymig::ingest

#endif  // CITYMIG_INGEST_HPP_
