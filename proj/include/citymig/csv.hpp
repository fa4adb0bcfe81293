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

#ifndef CITYMIG_CSV_HPP_
#define CITYMIG_CSV_HPP_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace citymig::csv {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
// Quoted fields may not span lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty row, or nullopt at end of stream.
  std::optional<Row> next();

  // 1-based physical line number of the row last returned.
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

Row split_line(std::string_view line);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace citymig::csv

#endif  // CITYMIG_CSV_HPP_
