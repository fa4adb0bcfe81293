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

#ifndef CITYMIG_PROPAGATION_HPP_
#define CITYMIG_PROPAGATION_HPP_

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "citymig/graph.hpp"

namespace citymig::propagation {

// Dense n x L matrix of label scores, row-major, plus the seed mask.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t labels)
      : rows_(rows), labels_(labels), values_(rows * labels, 0.0), seed_(rows, false) {}

  // One-hot rows for seeded nodes, zero rows elsewhere.
  static LabelMatrix from_seeds(std::size_t labels,
                                std::span<const std::optional<std::size_t>> seeds);

  std::size_t rows() const { return rows_; }
  std::size_t labels() const { return labels_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * labels_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * labels_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * labels_, labels_}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * labels_, labels_};
  }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool is_seed(std::size_t i) const { return seed_[i]; }
  void set_seed(std::size_t i, bool seed) { seed_[i] = seed; }
  std::size_t seed_count() const;

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t labels_ = 0;
  std::vector<double> values_;
  std::vector<bool> seed_;
};

struct PropagationConfig {
  int max_iterations = 100;
  // Stop once the max-norm change of Y between iterations drops below this.
  double tolerance = 1e-6;
  // Label columns per chunk; 0 means all columns at once.
  std::size_t chunk_width = 0;

  void validate() const;
};

struct PropagationResult {
  LabelMatrix labels;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
};

// Called after every completed iteration with the current state.
using IterationHook = std::function<void(int iteration, const LabelMatrix& state)>;

// Y <- W * Y followed by re-clamping the seed rows to Y0, until the
// max-norm change is below tolerance or max_iterations is reached.
// Full-width sparse x dense product.
PropagationResult propagate(const graph::SparseMatrix& transition, const LabelMatrix& y0,
                            const PropagationConfig& config);

// Same iteration, one block of label columns at a time. Each entry of W*Y is
// reduced in CSR order on both paths, so results are bitwise identical to
// propagate() for any chunk width.
PropagationResult propagate_chunked(const graph::SparseMatrix& transition,
                                    const LabelMatrix& y0, const PropagationConfig& config,
                                    const IterationHook& hook = {});

struct Checkpoint {
  int iteration = 0;
  std::size_t rows = 0;
  std::size_t labels = 0;
  std::vector<double> values;
};

// Binary layout: "CMCK", u32 version, u64 rows, u64 labels, u64 iteration,
// then rows*labels little-endian doubles.
void write_checkpoint(std::ostream& out, const LabelMatrix& state, int iteration);
Checkpoint read_checkpoint(std::istream& in);

// Continues a chunked run from a checkpoint taken with the same W and Y0.
PropagationResult resume(const graph::SparseMatrix& transition, const LabelMatrix& y0,
                         const Checkpoint& checkpoint, const PropagationConfig& config,
                         const IterationHook& hook = {});

struct Assignment {
  std::optional<std::size_t> label;
  double confidence = 0.0;
};

// Argmax per row, ties to the smallest label index; all-zero rows stay
// unassigned.
std::vector<Assignment> readout(const LabelMatrix& y);

}  // namespace citymig::propagation

#endif  // CITYMIG_PROPAGATION_HPP_
