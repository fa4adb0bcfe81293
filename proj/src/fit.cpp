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

#include "citymig/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "citymig/csv.hpp"

namespace citymig::fit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_size(std::span<const double> values, std::size_t n, std::string_view what) {
  if (values.size() < n) {
    throw FitError(std::string(what) + " needs at least " + std::to_string(n) + " values");
  }
}

void require_positive(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(values[i] > 0.0)) {
      throw FitError(std::string(what) + ": value " + csv::format_double(values[i]) +
                         " at index " + std::to_string(i) + " is not a positive finite number",
                     i);
    }
  }
}

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mean_log(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += std::log(v);
  return s / static_cast<double>(values.size());
}

// KS distance of the sorted tail [first, end) against a power law at
// sorted[first]. `log_suffix[i]` is the sum of ln(sorted[j]) for j >= i.
struct TailScore {
  double alpha = 0.0;
  double ks = kInf;
};

TailScore score_tail(std::span<const double> sorted, std::span<const double> log_suffix,
                     std::size_t first) {
  const std::size_t m = sorted.size() - first;
  const double xmin = sorted[first];
  const double log_sum = log_suffix[first] - static_cast<double>(m) * std::log(xmin);
  if (!(log_sum > 0.0)) return {};
  TailScore out;
  out.alpha = 1.0 + static_cast<double>(m) / log_sum;
  out.ks = powerlaw_ks_distance(sorted.subspan(first), PowerLawParams{out.alpha, xmin});
  return out;
}

std::string criterion_name(SelectionCriterion c) {
  return c == SelectionCriterion::kBic ? "bic" : "loglik";
}

}  // namespace

LogNormalParams fit_lognormal(std::span<const double> values) {
  require_size(values, 2, "log-normal fit");
  require_positive(values, "log-normal fit");
  const double mu = mean_log(values);
  double ss = 0.0;
  for (double v : values) {
    const double d = std::log(v) - mu;
    ss += d * d;
  }
  const double sigma2 = ss / static_cast<double>(values.size());
  if (!(sigma2 > 0.0)) throw FitError("log-normal fit: sample has zero log-variance");
  return {mu, sigma2};
}

GammaParams fit_gamma(std::span<const double> values, const GammaFitOptions& options) {
  require_size(values, 2, "gamma fit");
  require_positive(values, "gamma fit");
  const double mean = mean_of(values);
  const double s = std::log(mean) - mean_log(values);
  if (!(s > 0.0) || !std::isfinite(s)) throw FitError("gamma fit: sample is constant");

  // Minka's starting point is within a few percent of the root.
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < options.max_iterations; ++it) {
    const double f = std::log(k) - boost::math::digamma(k) - s;
    const double df = 1.0 / k - boost::math::trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = k / 2.0;
    const double step = std::abs(next - k);
    k = next;
    if (step < options.tolerance * std::max(1.0, k)) return {k, mean / k};
  }
  throw FitError("gamma fit: Newton iteration did not converge in " +
                 std::to_string(options.max_iterations) + " steps");
}

ExponentialParams fit_exponential(std::span<const double> values) {
  require_size(values, 2, "exponential fit");
  require_positive(values, "exponential fit");
  return {1.0 / mean_of(values)};
}

InverseGaussianParams fit_invgauss(std::span<const double> values) {
  require_size(values, 2, "inverse Gaussian fit");
  require_positive(values, "inverse Gaussian fit");
  const double mean = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += 1.0 / v - 1.0 / mean;
  if (!(acc > 0.0)) throw FitError("inverse Gaussian fit: sample is constant");
  return {mean, static_cast<double>(values.size()) / acc};
}

double powerlaw_ks_distance(std::span<const double> sorted_tail, const PowerLawParams& params) {
  const std::size_t m = sorted_tail.size();
  if (m == 0) return kInf;
  const double dm = static_cast<double>(m);
  double ks = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && sorted_tail[j] == sorted_tail[i]) ++j;
    // The empirical CDF jumps from i/m to j/m at this value.
    const double f = cdf(params, sorted_tail[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / dm),
                   std::abs(f - static_cast<double>(j) / dm)});
    i = j;
  }
  return ks;
}

PowerLawFit fit_powerlaw(std::span<const double> values, const PowerLawFitOptions& options) {
  require_size(values, 2, "power-law fit");
  require_positive(values, "power-law fit");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> log_suffix(sorted.size() + 1, 0.0);
  for (std::size_t i = sorted.size(); i-- > 0;) log_suffix[i] = log_suffix[i + 1] + std::log(sorted[i]);

  auto finish = [&](std::size_t first, const TailScore& score) {
    PowerLawFit out;
    out.params = {score.alpha, sorted[first]};
    out.ks_distance = score.ks;
    out.tail_size = sorted.size() - first;
    return out;
  };

  if (options.fixed_xmin) {
    const double xmin = *options.fixed_xmin;
    if (!(xmin > 0.0)) throw FitError("power-law fit: xmin must be positive");
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), xmin);
    const auto first = static_cast<std::size_t>(it - sorted.begin());
    if (first == sorted.size()) throw FitError("power-law fit: no values at or above xmin");
    const std::size_t m = sorted.size() - first;
    const double log_sum = log_suffix[first] - static_cast<double>(m) * std::log(xmin);
    if (!(log_sum > 0.0)) throw FitError("power-law fit: tail above xmin is constant");
    PowerLawFit out;
    out.params = {1.0 + static_cast<double>(m) / log_sum, xmin};
    out.ks_distance = powerlaw_ks_distance(std::span(sorted).subspan(first), out.params);
    out.tail_size = m;
    return out;
  }

  // First index of each distinct value that leaves a large enough tail.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    if (sorted.size() - i < std::max<std::size_t>(options.min_tail, 2)) break;
    starts.push_back(i);
  }
  if (starts.empty()) starts.push_back(0);

  std::vector<std::size_t> candidates;
  const std::size_t limit = std::max<std::size_t>(options.max_candidates, 1);
  if (starts.size() <= limit) {
    candidates = starts;
  } else {
    const double span = static_cast<double>(starts.size() - 1);
    for (std::size_t c = 0; c < limit; ++c) {
      const double pos = limit == 1 ? 0.0 : span * static_cast<double>(c) /
                                                 static_cast<double>(limit - 1);
      const auto idx = static_cast<std::size_t>(std::llround(pos));
      if (candidates.empty() || candidates.back() != starts[idx]) candidates.push_back(starts[idx]);
    }
  }

  std::size_t best_first = 0;
  TailScore best;
  for (std::size_t first : candidates) {
    const TailScore score = score_tail(sorted, log_suffix, first);
    if (score.ks < best.ks) {
      best = score;
      best_first = first;
    }
  }
  if (!std::isfinite(best.ks)) throw FitError("power-law fit: no usable xmin candidate");
  return finish(best_first, best);
}

double log_likelihood(const Params& params, std::span<const double> values) {
  double ll = 0.0;
  for (double v : values) ll += log_pdf(params, v);
  return ll;
}

Params fit_family(Family family, std::span<const double> values) {
  switch (family) {
    case Family::kLogNormal: return fit_lognormal(values);
    case Family::kGamma: return fit_gamma(values);
    case Family::kExponential: return fit_exponential(values);
    case Family::kInverseGaussian: return fit_invgauss(values);
    case Family::kPowerLaw: {
      require_size(values, 2, "power-law fit");
      require_positive(values, "power-law fit");
      PowerLawFitOptions options;
      options.fixed_xmin = *std::min_element(values.begin(), values.end());
      return fit_powerlaw(values, options).params;
    }
  }
  throw std::invalid_argument("unknown family");
}

BinnedDistribution bin_empirical(std::span<const double> values) {
  BinnedDistribution bins;
  if (values.empty()) return bins;
  for (double v : values) bins[std::llround(std::floor(v + 0.5))] += 1.0;
  const double n = static_cast<double>(values.size());
  for (auto& [bin, mass] : bins) mass /= n;
  return bins;
}

BinnedDistribution bin_fitted(const Params& params, const BinnedDistribution& bins) {
  BinnedDistribution out;
  for (const auto& entry : bins) {
    const double b = static_cast<double>(entry.first);
    out[entry.first] = std::max(0.0, cdf(params, b + 0.5) - cdf(params, b - 0.5));
  }
  return out;
}

double kl_divergence(const BinnedDistribution& p, const BinnedDistribution& q) {
  double kl = 0.0;
  for (const auto& [bin, mass] : p) {
    if (mass <= 0.0) continue;
    const auto it = q.find(bin);
    if (it == q.end() || !(it->second > 0.0)) return kInf;
    kl += mass * std::log(mass / it->second);
  }
  return kl;
}

const FamilyFit* FitReport::find(Family family) const {
  for (const auto& f : fits) {
    if (f.family == family) return &f;
  }
  return nullptr;
}

FitReport select_model(std::span<const double> values, std::span<const Family> families,
                       std::string series_id, SelectionCriterion criterion) {
  if (families.empty()) throw std::invalid_argument("select_model needs at least one family");
  FitReport report;
  report.series_id = std::move(series_id);
  report.criterion = criterion;

  std::vector<double> kept;
  kept.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw FitError("value at index " + std::to_string(i) + " is not finite", i);
    }
    if (values[i] <= 0.0) {
      ++report.rejected_nonpositive;
    } else {
      kept.push_back(values[i]);
    }
  }
  report.n = kept.size();

  const BinnedDistribution empirical = bin_empirical(kept);
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(kept.size(), 1)));

  const FamilyFit* best = nullptr;
  const FamilyFit* best_ll = nullptr;
  const FamilyFit* best_kl = nullptr;
  report.fits.reserve(families.size());
  for (Family family : families) {
    FamilyFit fit;
    fit.family = family;
    try {
      fit.params = fit_family(family, kept);
      fit.log_likelihood = log_likelihood(*fit.params, kept);
      fit.bic = parameter_count(family) * log_n - 2.0 * fit.log_likelihood;
      fit.kl = kl_divergence(empirical, bin_fitted(*fit.params, empirical));
    } catch (const std::exception& e) {
      fit.params.reset();
      fit.error = e.what();
    }
    report.fits.push_back(std::move(fit));
  }
  for (const auto& fit : report.fits) {
    if (!fit.ok() || !std::isfinite(fit.log_likelihood)) continue;
    if (!best_ll || fit.log_likelihood > best_ll->log_likelihood) best_ll = &fit;
    if (!best_kl || fit.kl < best_kl->kl) best_kl = &fit;
    const bool better = criterion == SelectionCriterion::kBic
                            ? (!best || fit.bic < best->bic)
                            : (!best || fit.log_likelihood > best->log_likelihood);
    if (better) best = &fit;
  }
  if (!best) {
    std::string why;
    for (const auto& fit : report.fits) {
      if (!why.empty()) why += "; ";
      why += std::string(family_name(fit.family)) + ": " +
             (fit.error.empty() ? "non-finite log-likelihood" : fit.error);
    }
    throw FitError("no family could be fitted (" + why + ")");
  }
  report.selected = best->family;
  report.best_log_likelihood = best_ll->family;
  report.best_kl = best_kl->family;
  return report;
}

nlohmann::json to_json(const Params& params) {
  nlohmann::json j;
  if (const auto* p = std::get_if<LogNormalParams>(&params)) {
    j = {{"mu", p->mu}, {"sigma2", p->sigma2}};
  } else if (const auto* p = std::get_if<GammaParams>(&params)) {
    j = {{"shape", p->shape}, {"scale", p->scale}};
  } else if (const auto* p = std::get_if<ExponentialParams>(&params)) {
    j = {{"rate", p->rate}};
  } else if (const auto* p = std::get_if<InverseGaussianParams>(&params)) {
    j = {{"mean", p->mean}, {"shape", p->shape}};
  } else if (const auto* p = std::get_if<PowerLawParams>(&params)) {
    j = {{"alpha", p->alpha}, {"xmin", p->xmin}};
  }
  return j;
}

nlohmann::json to_json(const FitReport& report) {
  nlohmann::json families = nlohmann::json::object();
  for (const auto& fit : report.fits) {
    nlohmann::json f;
    if (fit.ok()) {
      f["params"] = to_json(*fit.params);
      f["loglik"] = fit.log_likelihood;
      f["bic"] = fit.bic;
      // JSON has no infinity; a missing kl means the fit puts no mass on
      // some observed bin.
      if (std::isfinite(fit.kl)) f["kl"] = fit.kl;
      else f["kl"] = nullptr;
    } else {
      f["error"] = fit.error;
    }
    families[std::string(family_name(fit.family))] = std::move(f);
  }
  return {
      {"series", report.series_id},
      {"n", report.n},
      {"rejected_nonpositive", report.rejected_nonpositive},
      {"criterion", criterion_name(report.criterion)},
      {"selected", family_name(report.selected)},
      {"best_loglik", family_name(report.best_log_likelihood)},
      {"best_kl", family_name(report.best_kl)},
      {"families", std::move(families)},
  };
}

void write_plot_data(std::ostream& out, std::span<const double> values, const FitReport& report,
                     const PlotGrid& grid) {
  if (!(grid.step > 0.0) || grid.max_points == 0) {
    throw std::invalid_argument("plot grid needs a positive step and point count");
  }
  csv::Row header{"x", "empirical"};
  std::vector<const FamilyFit*> fitted;
  for (const auto& fit : report.fits) {
    if (!fit.ok()) continue;
    fitted.push_back(&fit);
    header.emplace_back(family_name(fit.family));
  }
  csv::write_row(out, header);

  std::vector<double> kept;
  for (double v : values) {
    if (std::isfinite(v) && v > 0.0) kept.push_back(v);
  }
  if (kept.empty()) return;
  const BinnedDistribution empirical = bin_empirical(kept);
  const double hi = *std::max_element(kept.begin(), kept.end()) + 0.5;
  double step = grid.step;
  if (hi / step > static_cast<double>(grid.max_points)) step = hi / static_cast<double>(grid.max_points);

  for (std::size_t i = 1; i <= grid.max_points; ++i) {
    const double x = step * static_cast<double>(i);
    if (x > hi) break;
    const auto bin = empirical.find(std::llround(std::floor(x + 0.5)));
    csv::Row row{csv::format_double(x),
                 csv::format_double(bin == empirical.end() ? 0.0 : bin->second)};
    for (const auto* fit : fitted) row.push_back(csv::format_double(pdf(*fit->params, x)));
    csv::write_row(out, row);
  }
}

EmpiricalStats empirical_stats(std::span<const double> values) {
  if (values.empty()) throw FitError("summary statistics need at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  EmpiricalStats out;
  out.count = n;
  out.mean = mean_of(sorted);
  out.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return out;
}

double memorylessness_deviation(std::span<const double> values, double s, double t) {
  if (values.empty()) throw FitError("memorylessness check needs at least one value");
  auto survival = [&](double x) {
    const auto above = std::count_if(values.begin(), values.end(), [x](double v) { return v > x; });
    return static_cast<double>(above) / static_cast<double>(values.size());
  };
  const double ss = survival(s);
  if (!(ss > 0.0)) throw FitError("memorylessness check: no values exceed s");
  return std::abs(survival(s + t) / ss - survival(t));
}

}  // namespace citymig::fit
