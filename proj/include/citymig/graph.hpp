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

#ifndef CITYMIG_GRAPH_HPP_
#define CITYMIG_GRAPH_HPP_

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "citymig/ingest.hpp"
#include "citymig/types.hpp"

namespace citymig::graph {

// Per-rule edge weights. Defaults are the grid-searched values
// lambda = (1, 3, 2).
struct RuleWeights {
  double co_author = 1.0;      // same paper, different authors
  double same_year = 3.0;      // same author, same year
  double adjacent_year = 2.0;  // same author, years one apart

  // Throws std::invalid_argument unless all >= 0 and at least one > 0.
  void validate() const;
};

struct Triplet {
  NodeId row;
  NodeId col;
  double value;
};

// Square CSR matrix with sorted column indices and no stored zeros.
class SparseMatrix {
 public:
  SparseMatrix() : offsets_{0} {}

  // Duplicate coordinates are summed in input order; zero sums are dropped.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t nnz() const { return cols_.size(); }

  std::span<const NodeId> row_cols(std::size_t row) const {
    return {cols_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const double> row_values(std::size_t row) const {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  // Zero when the entry is not stored.
  double at(std::size_t row, std::size_t col) const;
  double row_sum(std::size_t row) const;
  bool is_symmetric() const;

  std::vector<Triplet> triplets() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> cols_;
  std::vector<double> values_;
};

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);

// Undirected similarity graph over author-paper nodes.
struct SimilarityGraph {
  SparseMatrix weights;
  std::vector<double> degree;

  std::size_t size() const { return weights.size(); }
  std::size_t edge_count() const { return weights.nnz() / 2; }
};

SimilarityGraph make_graph(SparseMatrix weights);

// Accumulates rule weights for every node pair i != j:
//   co_author      if paper(i) == paper(j)
//   same_year      if author(i) == author(j) and year(i) == year(j)
//   adjacent_year  if author(i) == author(j) and |year(i) - year(j)| == 1
SimilarityGraph build_graph(std::span<const ingest::AuthorPaperNode> nodes,
                            const RuleWeights& weights = {});

// Row-stochastic transition matrix; rows with zero degree stay empty.
SparseMatrix row_normalize(const SimilarityGraph& graph);

// Text triple format: header "n nnz", then one "i j w" line per stored entry.
// Values use shortest round-trip formatting, so read(write(g)) == g exactly.
void write_matrix(std::ostream& out, const SparseMatrix& m);
SparseMatrix read_matrix(std::istream& in);

}  // namespace citymig::graph

#endif  // CITYMIG_GRAPH_HPP_
