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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "citymig/graph.hpp"
#include "citymig/propagation.hpp"
#include "support.hpp"

namespace citymig::propagation {
namespace {

using graph::SparseMatrix;
using graph::Triplet;

using testing::LabelProblem;
using testing::random_label_problem;

LabelProblem running_example_problem(std::vector<CityId>* label_ids = nullptr) {
  const auto set = testing::running_example_nodes();
  std::vector<CityId> ids{testing::kGreen, testing::kBlue, testing::kRed};
  std::sort(ids.begin(), ids.end());
  std::vector<std::optional<std::size_t>> seeds;
  for (const auto& n : set.nodes) {
    if (n.label) {
      seeds.emplace_back(static_cast<std::size_t>(std::find(ids.begin(), ids.end(), *n.label) - ids.begin()));
    } else {
      seeds.emplace_back();
    }
  }
  if (label_ids) *label_ids = ids;
  return {graph::row_normalize(graph::build_graph(set.nodes, {1, 3, 2})),
          LabelMatrix::from_seeds(ids.size(), seeds), seeds};
}

TEST(Propagate, RunningExampleFillsMissingAffiliations) {
  std::vector<CityId> ids;
  const auto p = running_example_problem(&ids);
  // The A1 papers 4 and 5 reach the rest of the graph through one 0.2 edge, so
  // the default 100 iterations stop short of 1e-6; the argmax is already stable.
  EXPECT_FALSE(propagate(p.w, p.y0, {}).converged);
  const auto result = propagate(p.w, p.y0, {1000, 1e-6, 0});
  EXPECT_TRUE(result.converged);
  EXPECT_EQ(readout(result.labels).size(), 9u);
  const auto early = readout(propagate(p.w, p.y0, {}).labels);
  for (std::size_t i = 0; i < early.size(); ++i) EXPECT_EQ(early[i].label, readout(result.labels)[i].label);
  const auto labels = readout(result.labels);
  const auto nodes = testing::running_example_nodes().nodes;
  auto city = [&](const char* a, const char* paper) {
    const auto& l = labels[testing::node_index(nodes, a, paper)].label;
    return l ? ids[*l] : CityId{};
  };
  EXPECT_EQ(city("A1", "4"), testing::kRed);
  EXPECT_EQ(city("A2", "4"), testing::kRed);
  EXPECT_EQ(city("A1", "5"), testing::kRed);
  EXPECT_EQ(city("A1", "1"), testing::kGreen);
  EXPECT_EQ(city("A2", "2"), testing::kBlue);
  EXPECT_EQ(city("A2", "8"), testing::kGreen);
}

TEST(Propagate, FullySupervisedGraphIsUnchanged) {
  const auto w = SparseMatrix::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const std::vector<std::optional<std::size_t>> seeds{0, 1};
  const auto y0 = LabelMatrix::from_seeds(2, seeds);
  const auto result = propagate(w, y0, {});
  EXPECT_EQ(result.iterations, 1);
  EXPECT_EQ(result.labels, y0);
}

TEST(Propagate, TwoNodeChainConverges) {
  const auto w = SparseMatrix::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const std::vector<std::optional<std::size_t>> seeds{0, std::nullopt};
  const auto result = propagate(w, LabelMatrix::from_seeds(2, seeds), {});
  EXPECT_EQ(result.labels(1, 0), 1.0);
  EXPECT_EQ(result.labels(1, 1), 0.0);
  EXPECT_EQ(readout(result.labels)[1].label, 0u);
}

TEST(Propagate, SingleLabelReachesEveryConnectedNode) {
  const auto w = graph::row_normalize(graph::make_graph(SparseMatrix::from_triplets(
      4, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}})));
  const std::vector<std::optional<std::size_t>> seeds{0, std::nullopt, std::nullopt, std::nullopt};
  const auto result = propagate(w, LabelMatrix::from_seeds(1, seeds), {1000, 1e-12, 0});
  const auto a = readout(result.labels);
  EXPECT_EQ(a[1].label, 0u);
  EXPECT_EQ(a[2].label, 0u);
  EXPECT_FALSE(a[3].label);  // isolated: unreachable from the seed
  EXPECT_NEAR(a[2].confidence, 1.0, 1e-9);
}

TEST(Propagate, RejectsBadInputs) {
  const auto w = SparseMatrix::from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const std::vector<std::optional<std::size_t>> none(2);
  EXPECT_THROW(propagate(w, LabelMatrix::from_seeds(2, none), {}), std::invalid_argument);
  const std::vector<std::optional<std::size_t>> three{0, 1, 0};
  EXPECT_THROW(propagate(w, LabelMatrix::from_seeds(2, three), {}), std::invalid_argument);
  EXPECT_THROW(propagate_chunked(w, LabelMatrix::from_seeds(2, three), {}), std::invalid_argument);
  const std::vector<std::optional<std::size_t>> ok{0, std::nullopt};
  EXPECT_THROW(propagate(w, LabelMatrix::from_seeds(2, ok), {0, 1e-6, 0}), std::invalid_argument);
}

TEST(Readout, ArgmaxTiesAndZeros) {
  LabelMatrix y(3, 3);
  y(0, 0) = 0.2, y(0, 1) = 0.7, y(0, 2) = 0.1;
  y(1, 0) = 0.5, y(1, 1) = 0.5;
  const auto a = readout(y);
  EXPECT_EQ(a[0].label, 1u);
  EXPECT_EQ(a[0].confidence, 0.7);
  EXPECT_EQ(a[1].label, 0u);
  EXPECT_FALSE(a[2].label);
}

TEST(Propagate, ChunkWidthDoesNotChangeBits) {
  const auto p = running_example_problem();
  const auto full = propagate(p.w, p.y0, {});
  for (std::size_t width : {1u, 2u, 3u, 0u}) {
    const auto chunked = propagate_chunked(p.w, p.y0, {100, 1e-6, width});
    EXPECT_EQ(chunked.labels, full.labels) << width;
    EXPECT_EQ(chunked.iterations, full.iterations);
  }
  std::mt19937_64 rng(21);
  const auto big = random_label_problem(rng, 300, 17, 0.02);
  const auto reference = propagate(big.w, big.y0, {});
  for (std::size_t width : {1u, 4u, 16u, 17u}) {
    EXPECT_EQ(propagate_chunked(big.w, big.y0, {100, 1e-6, width}).labels, reference.labels);
  }
}

TEST(Propagate, ClampAndRangeInvariantsHoldEveryIteration) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_label_problem(rng, 80, 4, 0.05);
    int calls = 0;
    propagate_chunked(p.w, p.y0, {100, 1e-6, 3}, [&](int, const LabelMatrix& y) {
      ++calls;
      for (std::size_t i = 0; i < y.rows(); ++i) {
        if (p.y0.is_seed(i)) {
          ASSERT_TRUE(std::equal(y.row(i).begin(), y.row(i).end(), p.y0.row(i).begin()));
        }
        for (double v : y.row(i)) {
          ASSERT_GE(v, 0.0);
          ASSERT_LE(v, 1.0 + 1e-12);
        }
      }
    });
    EXPECT_GT(calls, 0);
  }
}

TEST(Propagate, ConvergedStateIsAFixedPoint) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_label_problem(rng, 60, 3, 0.08);
    const PropagationConfig config{10000, 1e-6, 0};
    const auto result = propagate(p.w, p.y0, config);
    ASSERT_TRUE(result.converged);
    const Eigen::MatrixXd w = testing::to_dense(p.w);
    Eigen::MatrixXd y(result.labels.rows(), result.labels.labels());
    for (std::size_t i = 0; i < result.labels.rows(); ++i) {
      for (std::size_t j = 0; j < result.labels.labels(); ++j) y(i, j) = result.labels(i, j);
    }
    const Eigen::MatrixXd wy = w * y;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (p.y0.is_seed(static_cast<std::size_t>(i))) continue;
      EXPECT_LT((wy.row(i) - y.row(i)).cwiseAbs().maxCoeff(), config.tolerance);
    }
  }
}

TEST(Propagate, ArgmaxMatchesHarmonicSolution) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_label_problem(rng, 50, 4, 0.06);
    const auto result = propagate(p.w, p.y0, {100000, 1e-14, 0});
    const Eigen::MatrixXd oracle = testing::harmonic_solution(testing::to_dense(p.w), p.seeds, 4);
    const auto assigned = readout(result.labels);
    for (Eigen::Index i = 0; i < oracle.rows(); ++i) {
      Eigen::VectorXd r = oracle.row(i);
      std::vector<double> sorted(r.data(), r.data() + r.size());
      std::sort(sorted.rbegin(), sorted.rend());
      if (sorted[0] - sorted[1] <= 1e-9) continue;
      Eigen::Index best;
      r.maxCoeff(&best);
      EXPECT_EQ(assigned[static_cast<std::size_t>(i)].label, static_cast<std::size_t>(best));
    }
  }
}

TEST(Checkpoint, RoundTripAndResumeMatchUninterruptedRun) {
  std::mt19937_64 rng(25);
  const auto p = random_label_problem(rng, 120, 5, 0.03);
  const PropagationConfig config{100, 1e-9, 2};
  const auto full = propagate_chunked(p.w, p.y0, config);
  ASSERT_GT(full.iterations, 4);
  std::stringstream buf;
  propagate_chunked(p.w, p.y0, {3, 1e-9, 2}, [&](int it, const LabelMatrix& y) {
    if (it == 3) write_checkpoint(buf, y, it);
  });
  const auto cp = read_checkpoint(buf);
  EXPECT_EQ(cp.iteration, 3);
  EXPECT_EQ(cp.rows, 120u);
  EXPECT_EQ(cp.labels, 5u);
  const auto resumed = resume(p.w, p.y0, cp, config);
  EXPECT_EQ(resumed.iterations, full.iterations);
  EXPECT_EQ(resumed.labels, full.labels);

  std::istringstream junk("nope");
  EXPECT_ANY_THROW(read_checkpoint(junk));
  std::stringstream again;
  write_checkpoint(again, p.y0, 0);
  std::istringstream cut(again.str().substr(0, again.str().size() - 3));
  EXPECT_ANY_THROW(read_checkpoint(cut));
}

}  // namespace
}  // namespace citymig::propagation
