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

#include "citymig/graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "citymig/csv.hpp"
#include "citymig/error.hpp"

namespace citymig::graph {

void RuleWeights::validate() const {
  for (double w : {co_author, same_year, adjacent_year}) {
    if (!(w >= 0.0)) throw std::invalid_argument("rule weights must be >= 0");
  }
  if (co_author == 0.0 && same_year == 0.0 && adjacent_year == 0.0) {
    throw std::invalid_argument("at least one rule weight must be > 0");
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) throw std::out_of_range("triplet index out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });

  SparseMatrix m;
  m.offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const NodeId r = triplets[k].row;
    const NodeId c = triplets[k].col;
    double sum = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) {
      sum += triplets[k].value;
    }
    if (sum != 0.0) {
      m.cols_.push_back(c);
      m.values_.push_back(sum);
      ++m.offsets_[r + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) m.offsets_[i + 1] += m.offsets_[i];
  return m;
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  const auto cols = row_cols(row);
  auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - cols.begin())];
}

double SparseMatrix::row_sum(std::size_t row) const {
  double s = 0.0;
  for (double v : row_values(row)) s += v;
  return s;
}

bool SparseMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < size(); ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (at(cols[k], i) != vals[k]) return false;
    }
  }
  return true;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.push_back({static_cast<NodeId>(i), cols[k], vals[k]});
    }
  }
  return out;
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("matrix size mismatch");
  auto t = a.triplets();
  auto tb = b.triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  return SparseMatrix::from_triplets(a.size(), std::move(t));
}

SimilarityGraph make_graph(SparseMatrix weights) {
  SimilarityGraph g;
  g.degree.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) g.degree[i] = weights.row_sum(i);
  g.weights = std::move(weights);
  return g;
}

SimilarityGraph build_graph(std::span<const ingest::AuthorPaperNode> nodes,
                            const RuleWeights& weights) {
  weights.validate();
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].id != i) throw std::invalid_argument("node ids must be 0..n-1 in order");
  }

  std::vector<Triplet> triplets;
  auto link = [&](NodeId i, NodeId j, double w) {
    triplets.push_back({i, j, w});
    triplets.push_back({j, i, w});
  };

  if (weights.co_author > 0.0) {
    std::map<std::string_view, std::vector<NodeId>> by_paper;
    for (const auto& node : nodes) by_paper[node.paper].push_back(node.id);
    for (const auto& [paper, ids] : by_paper) {
      for (std::size_t a = 0; a < ids.size(); ++a) {
        for (std::size_t b = a + 1; b < ids.size(); ++b) link(ids[a], ids[b], weights.co_author);
      }
    }
  }

  if (weights.same_year > 0.0 || weights.adjacent_year > 0.0) {
    std::map<std::string_view, std::vector<NodeId>> by_author;
    for (const auto& node : nodes) by_author[node.author].push_back(node.id);
    for (auto& [author, ids] : by_author) {
      std::stable_sort(ids.begin(), ids.end(), [&](NodeId x, NodeId y) {
        return nodes[x].year < nodes[y].year;
      });
      for (std::size_t a = 0; a < ids.size(); ++a) {
        const int ya = nodes[ids[a]].year;
        for (std::size_t b = a + 1; b < ids.size(); ++b) {
          const int yb = nodes[ids[b]].year;
          if (yb > ya + 1) break;
          const double w = (yb == ya) ? weights.same_year : weights.adjacent_year;
          if (w > 0.0) link(ids[a], ids[b], w);
        }
      }
    }
  }

  return make_graph(SparseMatrix::from_triplets(n, std::move(triplets)));
}

SparseMatrix row_normalize(const SimilarityGraph& graph) {
  std::vector<Triplet> t;
  t.reserve(graph.weights.nnz());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double deg = graph.degree[i];
    if (deg <= 0.0) continue;
    const auto cols = graph.weights.row_cols(i);
    const auto vals = graph.weights.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      t.push_back({static_cast<NodeId>(i), cols[k], vals[k] / deg});
    }
  }
  return SparseMatrix::from_triplets(graph.size(), std::move(t));
}

void write_matrix(std::ostream& out, const SparseMatrix& m) {
  out << m.size() << ' ' << m.nnz() << '\n';
  for (const auto& t : m.triplets()) {
    out << t.row << ' ' << t.col << ' ' << csv::format_double(t.value) << '\n';
  }
}

SparseMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("graph file is empty");
  std::istringstream header(line);
  std::size_t n = 0, nnz = 0;
  if (!(header >> n >> nnz)) throw DataError("graph header must be 'n nnz'");
  std::vector<Triplet> t;
  t.reserve(nnz);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t i = 0, j = 0;
    std::string w;
    if (!(fields >> i >> j >> w) || i >= n || j >= n) {
      throw DataError("bad graph entry on line " + std::to_string(line_no));
    }
    try {
      t.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), csv::parse_double(w)});
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string(e.what()) + " on graph line " + std::to_string(line_no));
    }
  }
  if (t.size() != nnz) throw DataError("graph entry count does not match header");
  return SparseMatrix::from_triplets(n, std::move(t));
}

}  // namespace citymig::graph
