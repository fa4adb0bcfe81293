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

#ifndef CITYMIG_FIT_HPP_
#define CITYMIG_FIT_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "citymig/distributions.hpp"
#include "json.hpp"

namespace citymig::fit {

// Raised when a sample cannot be fitted. `index` points at the offending
// value for domain violations.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& message, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(message), index_(index) {}
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

// Closed-form MLE: mean and divide-by-n variance of ln(x).
LogNormalParams fit_lognormal(std::span<const double> values);

struct GammaFitOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

// Newton iteration on ln(k) - digamma(k) = ln(mean) - mean(ln x), then
// scale = mean / k.
GammaParams fit_gamma(std::span<const double> values, const GammaFitOptions& options = {});

ExponentialParams fit_exponential(std::span<const double> values);

InverseGaussianParams fit_invgauss(std::span<const double> values);

struct PowerLawFitOptions {
  // Upper bound on xmin candidates scanned; beyond it candidates are spread
  // evenly over the ranks of the distinct values.
  std::size_t max_candidates = 256;
  // Smallest tail a candidate xmin may leave.
  std::size_t min_tail = 10;
  // Skip the scan and use this cutoff.
  std::optional<double> fixed_xmin;
};

struct PowerLawFit {
  PowerLawParams params;
  double ks_distance = 0.0;
  std::size_t tail_size = 0;
};

// alpha = 1 + m / sum(ln(x_i / xmin)) over the m values >= xmin, with xmin
// chosen to minimise the Kolmogorov-Smirnov distance of the tail.
PowerLawFit fit_powerlaw(std::span<const double> values, const PowerLawFitOptions& options = {});

// KS distance between the empirical CDF of `sorted_tail` (ascending, all
// >= xmin) and the fitted power law.
double powerlaw_ks_distance(std::span<const double> sorted_tail, const PowerLawParams& params);

double log_likelihood(const Params& params, std::span<const double> values);

// Maximum-likelihood fit of one family over the whole sample. The power law
// uses xmin = min(values) so its likelihood is comparable with the others.
Params fit_family(Family family, std::span<const double> values);

// Probability mass per unit-width bin [b - 0.5, b + 0.5), keyed by b.
using BinnedDistribution = std::map<long long, double>;

BinnedDistribution bin_empirical(std::span<const double> values);
// Fitted mass on the bins present in `bins`.
BinnedDistribution bin_fitted(const Params& params, const BinnedDistribution& bins);

// KL(p || q); +inf when q is zero on a bin where p is not.
double kl_divergence(const BinnedDistribution& p, const BinnedDistribution& q);

enum class SelectionCriterion {
  kBic,            // minimise k ln(n) - 2 LL
  kLogLikelihood,  // maximise LL
};

struct FamilyFit {
  Family family = Family::kLogNormal;
  std::optional<Params> params;
  double log_likelihood = 0.0;
  double kl = 0.0;
  double bic = 0.0;
  std::string error;

  bool ok() const { return params.has_value(); }
};

struct FitReport {
  std::string series_id;
  std::size_t n = 0;
  std::size_t rejected_nonpositive = 0;
  SelectionCriterion criterion = SelectionCriterion::kBic;
  std::vector<FamilyFit> fits;
  Family selected = Family::kLogNormal;
  Family best_log_likelihood = Family::kLogNormal;
  Family best_kl = Family::kLogNormal;

  const FamilyFit* find(Family family) const;
};

// Fits every family, scores each by log-likelihood, BIC and binned KL
// divergence, and selects by `criterion`. Non-positive values are dropped
// and counted first. Throws FitError when no family can be fitted.
FitReport select_model(std::span<const double> values, std::span<const Family> families,
                       std::string series_id = {},
                       SelectionCriterion criterion = SelectionCriterion::kBic);

nlohmann::json to_json(const Params& params);
nlohmann::json to_json(const FitReport& report);

struct PlotGrid {
  double step = 0.25;
  std::size_t max_points = 2000;
};

// CSV: x, empirical (binned mass at round(x)), then one density column per
// fitted family.
void write_plot_data(std::ostream& out, std::span<const double> values, const FitReport& report,
                     const PlotGrid& grid = {});

struct EmpiricalStats {
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;
};

EmpiricalStats empirical_stats(std::span<const double> values);

// |P(X > s + t | X > s) - P(X > t)| under the empirical distribution. Near
// zero for memoryless (exponential) samples.
double memorylessness_deviation(std::span<const double> values, double s, double t);

}  // namespace citymig::fit

#endif  // CITYMIG_FIT_HPP_
