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

#include "citymig/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "citymig/csv.hpp"
#include "citymig/error.hpp"
#include "json.hpp"

namespace citymig::ingest {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void validate_city(const City& city) {
  if (city.name.empty() || city.country.empty()) {
    throw DataError("city needs a name and a country");
  }
  if (!(city.latitude >= -90.0 && city.latitude <= 90.0)) {
    throw DataError("latitude out of range for " + city.id);
  }
  if (!(city.longitude >= -180.0 && city.longitude <= 180.0)) {
    throw DataError("longitude out of range for " + city.id);
  }
}

}  // namespace

CityId make_city_id(std::string_view name, std::string_view country) {
  std::string id(name);
  id.push_back('|');
  id.append(country);
  return id;
}

std::string NormalizationPolicy::id() const {
  std::string s = "norm-v1:";
  s += lowercase ? 'L' : 'l';
  s += strip_emails ? 'E' : 'e';
  s += strip_punctuation ? 'P' : 'p';
  s += collapse_whitespace ? 'W' : 'w';
  return s;
}

std::string normalize_affiliation(std::string_view text,
                                  const NormalizationPolicy& policy) {
  std::string work;
  if (policy.strip_emails) {
    // Drop whitespace-separated tokens that look like e-mail addresses.
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t j = i;
      while (j < text.size() && !is_ascii_space(static_cast<unsigned char>(text[j]))) ++j;
      std::string_view token = text.substr(i, j - i);
      if (token.find('@') == std::string_view::npos) {
        work.append(token);
      }
      while (j < text.size() && is_ascii_space(static_cast<unsigned char>(text[j]))) {
        work.push_back(text[j]);
        ++j;
      }
      i = j;
    }
  } else {
    work.assign(text);
  }

  for (char& c : work) {
    const auto u = static_cast<unsigned char>(c);
    if (policy.strip_punctuation && is_ascii_punct(u)) {
      c = ' ';
    } else if (policy.lowercase && u < 0x80) {
      c = static_cast<char>(std::tolower(u));
    }
  }

  if (!policy.collapse_whitespace) return work;

  std::string out;
  bool pending_space = false;
  for (char c : work) {
    if (is_ascii_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gazetteer

void Gazetteer::add(std::string_view key, const City& input) {
  City city = input;
  if (city.id.empty()) city.id = make_city_id(city.name, city.country);
  validate_city(city);

  auto [it, inserted] = cities_.emplace(city.id, city);
  if (!inserted && !(it->second == city)) {
    throw DataError("conflicting gazetteer rows for city " + city.id);
  }

  const std::string norm = normalize_affiliation(key, policy_);
  if (norm.empty()) throw DataError("empty gazetteer key for city " + city.id);

  auto existing = keys_.find(norm);
  if (existing != keys_.end() && existing->second != city.id) {
    if (canonical_keys_.erase(norm) == 0) {
      throw DataError("gazetteer key '" + norm + "' maps to both " +
                      existing->second + " and " + city.id);
    }
  }
  keys_[norm] = city.id;
  canonical_keys_.erase(norm);

  if (inserted) {
    const std::string canonical =
        normalize_affiliation(city.name + ", " + city.country, policy_);
    if (!canonical.empty() && keys_.emplace(canonical, city.id).second) {
      canonical_keys_.insert(canonical);
    }
  }
}

Gazetteer Gazetteer::load_csv(std::istream& in, NormalizationPolicy policy) {
  if (!in) throw DataError("gazetteer stream is not readable");
  Gazetteer gazetteer(policy);
  csv::Reader reader(in);
  auto header = reader.next();
  const csv::Row expected = {"key", "city", "country", "continent", "lat", "lon"};
  if (!header || *header != expected) {
    throw DataError("gazetteer header must be key,city,country,continent,lat,lon");
  }
  while (auto row = reader.next()) {
    const std::string where = " (gazetteer line " + std::to_string(reader.line_number()) + ")";
    if (row->size() != expected.size()) throw DataError("wrong field count" + where);
    City city;
    city.name = trim((*row)[1]);
    city.country = trim((*row)[2]);
    city.continent = trim((*row)[3]);
    try {
      city.latitude = csv::parse_double(trim((*row)[4]));
      city.longitude = csv::parse_double(trim((*row)[5]));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what() + where);
    }
    try {
      gazetteer.add((*row)[0], city);
    } catch (const DataError& e) {
      throw DataError(e.what() + where);
    }
  }
  return gazetteer;
}

std::optional<City> Gazetteer::lookup(std::string_view affiliation) const {
  const std::string norm = normalize_affiliation(affiliation, policy_);
  if (norm.empty()) return std::nullopt;
  auto it = keys_.find(norm);
  if (it == keys_.end()) return std::nullopt;
  return cities_.at(it->second);
}

std::optional<City> CachingLookup::lookup(std::string_view affiliation) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(std::string(affiliation));
  if (it != cache_.end()) return it->second;
  ++backend_calls_;
  auto result = backend_.lookup(affiliation);
  cache_.emplace(std::string(affiliation), result);
  return result;
}

std::size_t CachingLookup::backend_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return backend_calls_;
}

std::optional<City> resolve_city(std::string_view affiliation,
                                 const CityLookup& lookup) {
  if (affiliation.empty()) return std::nullopt;
  return lookup.lookup(affiliation);
}

// ---------------------------------------------------------------------------
// Corpus readers

namespace {

// Shared record checks; returns an empty string when the record is valid.
std::string check_record(const PublicationRecord& rec, const ParseOptions& options,
                         const std::unordered_set<std::string>& seen_papers) {
  if (rec.paper_id.empty()) return "missing paper_id";
  if (seen_papers.count(rec.paper_id)) return "duplicate paper_id";
  if (rec.year < options.min_year || rec.year > options.max_year) {
    return "year out of range";
  }
  if (rec.authors.empty()) return "empty author list";
  std::unordered_set<std::string> authors;
  for (const auto& a : rec.authors) {
    if (a.empty()) return "empty author id";
    if (!authors.insert(a).second) return "duplicate author";
  }
  for (const auto& aff : rec.raw_affiliations) {
    if (!authors.count(aff.author)) return "affiliation author not on paper";
  }
  return {};
}

std::optional<std::string> json_key(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return std::nullopt;
}

}  // namespace

ParseResult JsonLinesReader::read(std::istream& in, const ParseOptions& options) const {
  if (!in) throw DataError("corpus stream is not readable");
  ParseResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    auto skip = [&](std::string reason) {
      result.skips.push_back({line_number, std::move(reason)});
    };

    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      skip("invalid json");
      continue;
    }

    PublicationRecord rec;
    if (auto id = obj.contains("paper_id") ? json_key(obj["paper_id"]) : std::nullopt) {
      rec.paper_id = *id;
    } else {
      skip("missing paper_id");
      continue;
    }
    if (!obj.contains("year") || !obj["year"].is_number_integer()) {
      skip("missing year");
      continue;
    }
    rec.year = obj["year"].get<int>();

    if (!obj.contains("authors") || !obj["authors"].is_array()) {
      skip("missing authors");
      continue;
    }
    bool bad = false;
    for (const auto& a : obj["authors"]) {
      auto id = json_key(a);
      if (!id) {
        bad = true;
        break;
      }
      rec.authors.push_back(*id);
    }
    if (bad) {
      skip("invalid author id");
      continue;
    }

    if (obj.contains("affiliations")) {
      const auto& affs = obj["affiliations"];
      if (!affs.is_array()) {
        skip("invalid affiliations");
        continue;
      }
      for (const auto& aff : affs) {
        auto author = aff.is_object() && aff.contains("author") ? json_key(aff["author"])
                                                                : std::nullopt;
        if (!author || !aff.contains("text") || !aff["text"].is_string()) {
          bad = true;
          break;
        }
        rec.raw_affiliations.push_back({*author, aff["text"].get<std::string>()});
      }
      if (bad) {
        skip("invalid affiliations");
        continue;
      }
    }

    if (auto reason = check_record(rec, options, seen); !reason.empty()) {
      skip(std::move(reason));
      continue;
    }
    seen.insert(rec.paper_id);
    result.records.push_back(std::move(rec));
  }
  if (in.bad()) throw DataError("error while reading corpus stream");
  return result;
}

namespace {

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)));
      } catch (const std::exception&) {
        out.append(s.substr(i, semi - i + 1));
        i = semi;
        continue;
      }
      // UTF-8 encode.
      if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    } else {
      // Named entities from the DBLP DTD (umlauts etc.) are kept verbatim.
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

const std::set<std::string, std::less<>> kDblpRecordTags = {
    "article", "inproceedings", "proceedings", "book", "incollection",
    "phdthesis", "mastersthesis", "www"};

// Collects the text of every <tag>...</tag> directly inside `body`.
std::vector<std::string> element_texts(std::string_view body, std::string_view tag) {
  std::vector<std::string> out;
  const std::string open = "<" + std::string(tag);
  const std::string close = "</" + std::string(tag) + ">";
  std::size_t pos = 0;
  while ((pos = body.find(open, pos)) != std::string_view::npos) {
    const std::size_t after = pos + open.size();
    if (after >= body.size() || (body[after] != '>' && body[after] != ' ')) {
      pos = after;
      continue;
    }
    const auto gt = body.find('>', after);
    const auto end = body.find(close, gt);
    if (gt == std::string_view::npos || end == std::string_view::npos) break;
    out.push_back(decode_entities(trim(body.substr(gt + 1, end - gt - 1))));
    pos = end + close.size();
  }
  return out;
}

}  // namespace

ParseResult DblpXmlReader::read(std::istream& in, const ParseOptions& options) const {
  if (!in) throw DataError("corpus stream is not readable");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("error while reading corpus stream");

  ParseResult result;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t line_pos = 0;
  auto line_at = [&](std::size_t p) {
    line += static_cast<std::size_t>(
        std::count(text.begin() + static_cast<std::ptrdiff_t>(line_pos),
                   text.begin() + static_cast<std::ptrdiff_t>(p), '\n'));
    line_pos = p;
    return line;
  };

  while ((pos = text.find('<', pos)) != std::string::npos) {
    std::size_t name_end = pos + 1;
    while (name_end < text.size() && std::isalpha(static_cast<unsigned char>(text[name_end]))) {
      ++name_end;
    }
    const std::string tag = text.substr(pos + 1, name_end - pos - 1);
    if (!kDblpRecordTags.count(tag)) {
      ++pos;
      continue;
    }
    const std::size_t record_line = line_at(pos);
    const auto head_end = text.find('>', name_end);
    const std::string close = "</" + tag + ">";
    const auto body_end = head_end == std::string::npos ? head_end : text.find(close, head_end);
    if (body_end == std::string::npos) {
      result.skips.push_back({record_line, "unterminated record"});
      break;
    }
    std::string_view head(text.data() + name_end, head_end - name_end);
    std::string_view body(text.data() + head_end + 1, body_end - head_end - 1);
    pos = body_end + close.size();

    PublicationRecord rec;
    if (auto k = head.find("key=\""); k != std::string_view::npos) {
      const auto q = head.find('"', k + 5);
      if (q != std::string_view::npos) rec.paper_id = decode_entities(head.substr(k + 5, q - k - 5));
    }
    if (rec.paper_id.empty()) {
      result.skips.push_back({record_line, "missing paper_id"});
      continue;
    }
    const auto years = element_texts(body, "year");
    if (years.empty()) {
      result.skips.push_back({record_line, "missing year"});
      continue;
    }
    try {
      rec.year = static_cast<int>(csv::parse_int(years.front()));
    } catch (const std::invalid_argument&) {
      result.skips.push_back({record_line, "missing year"});
      continue;
    }
    rec.authors = element_texts(body, "author");
    if (auto reason = check_record(rec, options, seen); !reason.empty()) {
      result.skips.push_back({record_line, std::move(reason)});
      continue;
    }
    seen.insert(rec.paper_id);
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::unique_ptr<CorpusReader> reader_for(const std::filesystem::path& path) {
  if (path.extension() == ".xml") return std::make_unique<DblpXmlReader>();
  return std::make_unique<JsonLinesReader>();
}

ParseResult parse_corpus(std::istream& in, const ParseOptions& options) {
  return JsonLinesReader{}.read(in, options);
}

void write_corpus(std::ostream& out, std::span<const PublicationRecord> records) {
  for (const auto& rec : records) {
    nlohmann::json obj = {{"paper_id", rec.paper_id}, {"year", rec.year}, {"authors", rec.authors}};
    if (!rec.raw_affiliations.empty()) {
      nlohmann::json affs = nlohmann::json::array();
      for (const auto& a : rec.raw_affiliations) affs.push_back({{"author", a.author}, {"text", a.text}});
      obj["affiliations"] = std::move(affs);
    }
    out << obj.dump() << '\n';
  }
}

void write_skip_report(std::ostream& out, std::span<const SkipEntry> skips) {
  out << "line_number,reason\n";
  for (const auto& s : skips) {
    csv::write_row(out, {std::to_string(s.line_number), s.reason});
  }
}

std::vector<SeedRow> load_seeds_csv(std::istream& in) {
  if (!in) throw DataError("seed stream is not readable");
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || *header != csv::Row{"paper_id", "author", "text"}) {
    throw DataError("seed file header must be paper_id,author,text");
  }
  std::vector<SeedRow> rows;
  while (auto row = reader.next()) {
    if (row->size() != 3) {
      throw DataError("wrong field count (seed line " + std::to_string(reader.line_number()) + ")");
    }
    rows.push_back({(*row)[0], (*row)[1], (*row)[2]});
  }
  return rows;
}

std::size_t attach_seeds(std::vector<PublicationRecord>& records,
                         std::span<const SeedRow> seeds) {
  std::unordered_map<std::string, std::size_t> by_paper;
  for (std::size_t i = 0; i < records.size(); ++i) by_paper.emplace(records[i].paper_id, i);
  std::size_t unmatched = 0;
  for (const auto& seed : seeds) {
    auto it = by_paper.find(seed.paper_id);
    if (it == by_paper.end()) {
      ++unmatched;
      continue;
    }
    auto& rec = records[it->second];
    if (std::find(rec.authors.begin(), rec.authors.end(), seed.author) == rec.authors.end()) {
      ++unmatched;
      continue;
    }
    rec.raw_affiliations.push_back({seed.author, seed.text});
  }
  return unmatched;
}

// ---------------------------------------------------------------------------
// Nodes

std::size_t NodeSet::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const AuthorPaperNode& n) { return n.label.has_value(); }));
}

NodeSet build_nodes(std::span<const PublicationRecord> records, const CityLookup& lookup) {
  NodeSet out;

  struct Pending {
    const AuthorId* author;
    const PublicationRecord* record;
  };
  std::vector<Pending> pairs;
  for (const auto& rec : records) {
    for (const auto& a : rec.authors) pairs.push_back({&a, &rec});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pending& x, const Pending& y) {
    return std::tie(*x.author, x.record->paper_id) < std::tie(*y.author, y.record->paper_id);
  });

  std::map<std::pair<std::string_view, std::string_view>, NodeId> index;
  out.nodes.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto id = static_cast<NodeId>(out.nodes.size());
    out.nodes.push_back({id, *p.author, p.record->paper_id, p.record->year, std::nullopt});
  }
  for (const auto& node : out.nodes) {
    index.emplace(std::pair{std::string_view(node.author), std::string_view(node.paper)}, node.id);
  }

  // Seeds in input order; the first resolvable seed of a pair wins.
  for (const auto& rec : records) {
    for (const auto& seed : rec.raw_affiliations) {
      auto city = resolve_city(seed.text, lookup);
      if (!city) {
        ++out.seeds_missed;
        continue;
      }
      ++out.seeds_resolved;
      auto& node = out.nodes[index.at({seed.author, rec.paper_id})];
      if (!node.label) {
        node.label = city->id;
        out.cities.emplace(city->id, *city);
      } else if (*node.label != city->id) {
        out.conflicts.push_back({node.author, node.paper, *node.label, city->id});
      }
    }
  }
  return out;
}

}  // namespace citymig::ingest
