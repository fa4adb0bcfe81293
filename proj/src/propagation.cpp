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

#include "citymig/propagation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

#include "citymig/error.hpp"

namespace citymig::propagation {

LabelMatrix LabelMatrix::from_seeds(std::size_t labels,
                                    std::span<const std::optional<std::size_t>> seeds) {
  LabelMatrix y(seeds.size(), labels);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!seeds[i]) continue;
    if (*seeds[i] >= labels) throw std::out_of_range("seed label out of range");
    y(i, *seeds[i]) = 1.0;
    y.set_seed(i, true);
  }
  return y;
}

std::size_t LabelMatrix::seed_count() const {
  return static_cast<std::size_t>(std::count(seed_.begin(), seed_.end(), true));
}

void PropagationConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
}

namespace {

void check_inputs(const graph::SparseMatrix& w, const LabelMatrix& y0,
                  const PropagationConfig& config) {
  config.validate();
  if (w.size() != y0.rows()) {
    throw std::invalid_argument("dimension mismatch: W is " + std::to_string(w.size()) +
                                "x" + std::to_string(w.size()) + ", Y0 has " +
                                std::to_string(y0.rows()) + " rows");
  }
  if (y0.labels() == 0) throw std::invalid_argument("label matrix has no columns");
  if (y0.seed_count() == 0) throw std::invalid_argument("no seed rows to propagate");
}

// One chunked iteration over columns [c0, c1): scratch <- W * Y[:, c0:c1],
// seed rows clamped to Y0, written back into `y`. Returns the max change.
double step_chunk(const graph::SparseMatrix& w, const LabelMatrix& y0, LabelMatrix& y,
                  std::size_t c0, std::size_t c1, std::vector<double>& scratch) {
  const std::size_t n = y.rows();
  const std::size_t labels = y.labels();
  const std::size_t width = c1 - c0;
  scratch.assign(n * width, 0.0);
  const auto values = y.values();

  for (std::size_t i = 0; i < n; ++i) {
    double* out = scratch.data() + i * width;
    if (y0.is_seed(i)) {
      for (std::size_t j = 0; j < width; ++j) out[j] = y0(i, c0 + j);
      continue;
    }
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double wk = vals[k];
      const double* src = values.data() + static_cast<std::size_t>(cols[k]) * labels + c0;
      for (std::size_t j = 0; j < width; ++j) out[j] += wk * src[j];
    }
  }

  double change = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = y.row(i);
    const double* in = scratch.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) {
      change = std::max(change, std::abs(in[j] - row[c0 + j]));
      row[c0 + j] = in[j];
    }
  }
  return change;
}

PropagationResult run_chunked(const graph::SparseMatrix& w, const LabelMatrix& y0,
                              LabelMatrix state, int start_iteration,
                              const PropagationConfig& config, const IterationHook& hook) {
  const std::size_t labels = y0.labels();
  const std::size_t width =
      config.chunk_width == 0 ? labels : std::min(config.chunk_width, labels);
  std::vector<double> scratch;

  PropagationResult result;
  result.iterations = start_iteration;
  while (result.iterations < config.max_iterations) {
    double change = 0.0;
    for (std::size_t c0 = 0; c0 < labels; c0 += width) {
      change = std::max(change, step_chunk(w, y0, state, c0, std::min(c0 + width, labels), scratch));
    }
    ++result.iterations;
    result.last_change = change;
    if (hook) hook(result.iterations, state);
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.labels = std::move(state);
  return result;
}

}  // namespace

PropagationResult propagate(const graph::SparseMatrix& w, const LabelMatrix& y0,
                            const PropagationConfig& config) {
  check_inputs(w, y0, config);
  const std::size_t n = y0.rows();
  const std::size_t labels = y0.labels();

  LabelMatrix y = y0;
  std::vector<double> next(n * labels);
  PropagationResult result;
  while (result.iterations < config.max_iterations) {
    std::fill(next.begin(), next.end(), 0.0);
    const auto cur = y.values();
    for (std::size_t i = 0; i < n; ++i) {
      double* out = next.data() + i * labels;
      const auto cols = w.row_cols(i);
      const auto vals = w.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const double* src = cur.data() + static_cast<std::size_t>(cols[k]) * labels;
        for (std::size_t j = 0; j < labels; ++j) out[j] += vals[k] * src[j];
      }
    }
    // Push-back: seed rows return to their Y0 distribution.
    for (std::size_t i = 0; i < n; ++i) {
      if (!y0.is_seed(i)) continue;
      std::copy_n(y0.row(i).begin(), labels, next.begin() + static_cast<std::ptrdiff_t>(i * labels));
    }
    double change = 0.0;
    auto dst = y.values();
    for (std::size_t e = 0; e < next.size(); ++e) {
      change = std::max(change, std::abs(next[e] - dst[e]));
      dst[e] = next[e];
    }
    ++result.iterations;
    result.last_change = change;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.labels = std::move(y);
  return result;
}

PropagationResult propagate_chunked(const graph::SparseMatrix& w, const LabelMatrix& y0,
                                    const PropagationConfig& config, const IterationHook& hook) {
  check_inputs(w, y0, config);
  return run_chunked(w, y0, y0, 0, config, hook);
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw DataError("truncated checkpoint");
  }
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const LabelMatrix& state, int iteration) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, state.rows());
  put<std::uint64_t>(out, state.labels());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(iteration));
  const auto values = state.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw DataError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("not a propagation checkpoint");
  }
  if (get<std::uint32_t>(in) != kVersion) throw DataError("unsupported checkpoint version");
  Checkpoint cp;
  cp.rows = get<std::uint64_t>(in);
  cp.labels = get<std::uint64_t>(in);
  cp.iteration = static_cast<int>(get<std::uint64_t>(in));
  cp.values.resize(cp.rows * cp.labels);
  if (!in.read(reinterpret_cast<char*>(cp.values.data()),
               static_cast<std::streamsize>(cp.values.size() * sizeof(double)))) {
    throw DataError("truncated checkpoint");
  }
  return cp;
}

PropagationResult resume(const graph::SparseMatrix& w, const LabelMatrix& y0,
                         const Checkpoint& checkpoint, const PropagationConfig& config,
                         const IterationHook& hook) {
  check_inputs(w, y0, config);
  if (checkpoint.rows != y0.rows() || checkpoint.labels != y0.labels()) {
    throw std::invalid_argument("checkpoint shape does not match Y0");
  }
  LabelMatrix state = y0;
  std::copy(checkpoint.values.begin(), checkpoint.values.end(), state.values().begin());
  return run_chunked(w, y0, std::move(state), checkpoint.iteration, config, hook);
}

std::vector<Assignment> readout(const LabelMatrix& y) {
  std::vector<Assignment> out(y.rows());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto row = y.row(i);
    double best = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] > best) {
        best = row[j];
        out[i].label = j;
      }
    }
    out[i].confidence = best;
  }
  return out;
}

}  // namespace citymig::propagation
