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

#ifndef CITYMIG_TESTS_SUPPORT_HPP_
#define CITYMIG_TESTS_SUPPORT_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "citymig/graph.hpp"
#include "citymig/ingest.hpp"
#include "citymig/linkrank.hpp"
#include "citymig/propagation.hpp"

namespace citymig::testing {

namespace fs = std::filesystem;

inline fs::path data_path(const std::string& name) { return fs::path(CITYMIG_TEST_DATA_DIR) / name; }

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("citymig-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline ingest::Gazetteer load_gazetteer() {
  std::ifstream in(data_path("gazetteer.csv"));
  return ingest::Gazetteer::load_csv(in);
}

inline std::vector<ingest::PublicationRecord> running_example_records() {
  std::ifstream in(data_path("running_example.jsonl"));
  return ingest::parse_corpus(in).records;
}

inline ingest::NodeSet running_example_nodes() {
  const auto gazetteer = load_gazetteer();
  return ingest::build_nodes(running_example_records(), gazetteer);
}

inline const CityId kGreen = "Bonn|DE";
inline const CityId kBlue = "Boston|US";
inline const CityId kRed = "Rome|IT";

// Index of the node for (author, paper) in a node list.
inline std::size_t node_index(std::span<const ingest::AuthorPaperNode> nodes,
                              const std::string& author, const std::string& paper) {
  for (const auto& n : nodes) {
    if (n.author == author && n.paper == paper) return n.id;
  }
  throw std::out_of_range("no node " + author + "/" + paper);
}

// O(n^2) evaluation of the three rules, straight from their definition.
inline Eigen::MatrixXd dense_rule_weights(std::span<const ingest::AuthorPaperNode> nodes,
                                          const graph::RuleWeights& w) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = nodes[static_cast<std::size_t>(i)];
      const auto& b = nodes[static_cast<std::size_t>(j)];
      if (a.paper == b.paper) m(i, j) += w.co_author;
      if (a.author == b.author && a.year == b.year) m(i, j) += w.same_year;
      if (a.author == b.author && std::abs(a.year - b.year) == 1) m(i, j) += w.adjacent_year;
    }
  }
  return m;
}

inline Eigen::MatrixXd to_dense(const graph::SparseMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto cols = m.row_cols(i);
    const auto vals = m.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
    }
  }
  return d;
}

// Harmonic fixed point of clamped propagation on a row-stochastic W:
// Y_U = (I - W_UU)^-1 W_US Y_S, seed rows one-hot.
inline Eigen::MatrixXd harmonic_solution(const Eigen::MatrixXd& w,
                                         std::span<const std::optional<std::size_t>> seeds,
                                         std::size_t labels) {
  const auto n = w.rows();
  std::vector<Eigen::Index> s, u;
  for (Eigen::Index i = 0; i < n; ++i) (seeds[static_cast<std::size_t>(i)] ? s : u).push_back(i);
  Eigen::MatrixXd ys = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size()),
                                             static_cast<Eigen::Index>(labels));
  for (std::size_t k = 0; k < s.size(); ++k) {
    ys(static_cast<Eigen::Index>(k),
       static_cast<Eigen::Index>(*seeds[static_cast<std::size_t>(s[k])])) = 1.0;
  }
  Eigen::MatrixXd wuu(u.size(), u.size()), wus(u.size(), s.size());
  for (std::size_t a = 0; a < u.size(); ++a) {
    for (std::size_t b = 0; b < u.size(); ++b) wuu(a, b) = w(u[a], u[b]);
    for (std::size_t b = 0; b < s.size(); ++b) wus(a, b) = w(u[a], s[b]);
  }
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(wuu.rows(), wuu.cols());
  const Eigen::MatrixXd yu = (i - wuu).fullPivLu().solve(wus * ys);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(labels));
  for (std::size_t k = 0; k < s.size(); ++k) y.row(s[k]) = ys.row(static_cast<Eigen::Index>(k));
  for (std::size_t k = 0; k < u.size(); ++k) y.row(u[k]) = yu.row(static_cast<Eigen::Index>(k));
  return y;
}

inline Eigen::MatrixXd adjacency(const linkrank::MigrationGraph& g, bool weighted = true) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) {
    a(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) =
        weighted ? static_cast<double>(e.weight) : 1.0;
  }
  return a;
}

// Principal eigenvector of a symmetric PSD matrix, nonnegative, unit norm.
inline Eigen::VectorXd principal_eigenvector(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd v = solver.eigenvectors().col(m.rows() - 1);
  if (v.sum() < 0) v = -v;
  return v.normalized();
}

struct HitsReference {
  Eigen::VectorXd hub;
  Eigen::VectorXd authority;
};

inline HitsReference hits_reference(const linkrank::MigrationGraph& g) {
  const Eigen::MatrixXd a = adjacency(g);
  return {principal_eigenvector(a * a.transpose()), principal_eigenvector(a.transpose() * a)};
}

// Stationary vector of the Google matrix via a dense eigensolver.
inline Eigen::VectorXd pagerank_reference(const linkrank::MigrationGraph& g, double damping) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const Eigen::MatrixXd a = adjacency(g);
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double out = a.row(i).sum();
    if (out > 0) p.row(i) = a.row(i) / out;
    else p.row(i).setConstant(1.0 / static_cast<double>(n));
  }
  const Eigen::MatrixXd google =
      damping * p + Eigen::MatrixXd::Constant(n, n, (1.0 - damping) / static_cast<double>(n));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(google.transpose());
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < n; ++k) {
    if (std::abs(solver.eigenvalues()[k] - 1.0) < std::abs(solver.eigenvalues()[best] - 1.0)) {
      best = k;
    }
  }
  Eigen::VectorXd v = solver.eigenvectors().col(best).real();
  return v / v.sum();
}

// Random directed city graph with integer weights.
inline linkrank::MigrationGraph random_migration_graph(std::mt19937_64& rng, std::size_t n,
                                                       double density) {
  std::vector<sketch::Move> moves;
  std::bernoulli_distribution edge(density);
  std::uniform_int_distribution<int> weight(1, 20);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !edge(rng)) continue;
      const int w = weight(rng);
      for (int k = 0; k < w; ++k) {
        moves.push_back({"x", "c" + std::to_string(1000 + i), "c" + std::to_string(1000 + j), 2000, 1});
      }
    }
  }
  auto g = linkrank::build_migration_graph(moves);
  // Keep every city, including isolated ones, by adding them explicitly.
  std::vector<CityId> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back("c" + std::to_string(1000 + i));
  std::vector<std::size_t> remap(g.cities.size());
  for (std::size_t k = 0; k < g.cities.size(); ++k) {
    remap[k] = static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), g.cities[k]) - all.begin());
  }
  for (auto& e : g.edges) {
    e.from = remap[e.from];
    e.to = remap[e.to];
  }
  g.cities = std::move(all);
  return g;
}

// Samplers for generate-and-refit oracles.
inline std::vector<double> draw_lognormal(std::mt19937_64& rng, std::size_t n, double mu, double sigma) {
  std::lognormal_distribution<double> d(mu, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> draw_gamma(std::mt19937_64& rng, std::size_t n, double k, double theta) {
  std::gamma_distribution<double> d(k, theta);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> draw_exponential(std::mt19937_64& rng, std::size_t n, double rate) {
  std::exponential_distribution<double> d(rate);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Michael, Schucany and Haas transformation.
inline std::vector<double> draw_invgauss(std::mt19937_64& rng, std::size_t n, double mean, double shape) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) {
    const double z = normal(rng);
    const double y = z * z;
    const double r = mean + mean * mean * y / (2.0 * shape) -
                     mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
    x = unit(rng) <= mean / (mean + r) ? r : mean * mean / r;
  }
  return v;
}

inline std::vector<double> draw_pareto(std::mt19937_64& rng, std::size_t n, double alpha, double xmin) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = xmin * std::pow(1.0 - unit(rng), -1.0 / (alpha - 1.0));
  return v;
}

// Nelder-Mead minimiser for small smooth problems.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> start, double step, int iterations) {
  const std::size_t d = start.size();
  std::vector<std::vector<double>> simplex{start};
  for (std::size_t i = 0; i < d; ++i) {
    auto p = start;
    p[i] += step;
    simplex.push_back(p);
  }
  std::vector<double> fx;
  for (const auto& p : simplex) fx.push_back(f(p));
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::size_t> order(d + 1);
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
    const std::size_t best = order[0], worst = order[d], second = order[d - 1];
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
    }
    auto along = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      return p;
    };
    const auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < fx[best]) {
      const auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) simplex[worst] = expanded, fx[worst] = fe;
      else simplex[worst] = reflected, fx[worst] = fr;
    } else if (fr < fx[second]) {
      simplex[worst] = reflected, fx[worst] = fr;
    } else {
      const auto contracted = along(0.5);
      const double fc = f(contracted);
      if (fc < fx[worst]) {
        simplex[worst] = contracted, fx[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < d; ++k) {
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          fx[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto it = std::min_element(fx.begin(), fx.end());
  return simplex[static_cast<std::size_t>(it - fx.begin())];
}

// Propagation problem on a row-normalised graph.
struct LabelProblem {
  graph::SparseMatrix w;
  propagation::LabelMatrix y0;
  std::vector<std::optional<std::size_t>> seeds;
};

// Random symmetric graph with at least one seed per connected component.
inline LabelProblem random_label_problem(std::mt19937_64& rng, std::size_t n, std::size_t labels, double density) {
  std::vector<graph::Triplet> t;
  std::bernoulli_distribution edge(density);
  std::uniform_real_distribution<double> weight(0.1, 5.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!edge(rng)) continue;
      const double v = weight(rng);
      t.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), v});
      t.push_back({static_cast<NodeId>(j), static_cast<NodeId>(i), v});
    }
  }
  auto raw = graph::SparseMatrix::from_triplets(n, t);
  std::vector<std::optional<std::size_t>> seeds(n);
  std::uniform_int_distribution<std::size_t> label(0, labels - 1);
  std::bernoulli_distribution seeded(0.15);
  for (auto& s : seeds) {
    if (seeded(rng)) s = label(rng);
  }
  // Component labelling by BFS; seed the first node of unseeded components.
  std::vector<int> comp(n, -1);
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    std::vector<std::size_t> stack{start}, members;
    comp[start] = static_cast<int>(start);
    bool has_seed = false;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      members.push_back(v);
      has_seed |= seeds[v].has_value();
      for (auto c : raw.row_cols(v)) {
        if (comp[c] < 0) {
          comp[c] = static_cast<int>(start);
          stack.push_back(c);
        }
      }
    }
    if (!has_seed) seeds[members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)]] = label(rng);
  }
  return {graph::row_normalize(graph::make_graph(raw)), propagation::LabelMatrix::from_seeds(labels, seeds), seeds};
}

}  // namespace citymig::testing

#endif  // CITYMIG_TESTS_SUPPORT_HPP_
