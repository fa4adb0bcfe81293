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

#include "citymig/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace citymig::fit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

// Standard normal CDF.
double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kLogNormal: return "lognormal";
    case Family::kGamma: return "gamma";
    case Family::kExponential: return "exponential";
    case Family::kInverseGaussian: return "invgauss";
    case Family::kPowerLaw: return "powerlaw";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

int parameter_count(Family family) { return family == Family::kExponential ? 1 : 2; }

Family family_of(const Params& params) {
  return std::visit(
      Overloaded{
          [](const LogNormalParams&) { return Family::kLogNormal; },
          [](const GammaParams&) { return Family::kGamma; },
          [](const ExponentialParams&) { return Family::kExponential; },
          [](const InverseGaussianParams&) { return Family::kInverseGaussian; },
          [](const PowerLawParams&) { return Family::kPowerLaw; },
      },
      params);
}

void validate(const Params& params) {
  std::visit(Overloaded{
                 [](const LogNormalParams& p) {
                   if (!std::isfinite(p.mu) || !positive(p.sigma2)) {
                     throw std::invalid_argument("log-normal needs finite mu and sigma2 > 0");
                   }
                 },
                 [](const GammaParams& p) {
                   if (!positive(p.shape) || !positive(p.scale)) {
                     throw std::invalid_argument("gamma needs shape > 0 and scale > 0");
                   }
                 },
                 [](const ExponentialParams& p) {
                   if (!positive(p.rate)) throw std::invalid_argument("exponential needs rate > 0");
                 },
                 [](const InverseGaussianParams& p) {
                   if (!positive(p.mean) || !positive(p.shape)) {
                     throw std::invalid_argument("inverse Gaussian needs mean > 0 and shape > 0");
                   }
                 },
                 [](const PowerLawParams& p) {
                   if (!(std::isfinite(p.alpha) && p.alpha > 1.0) || !positive(p.xmin)) {
                     throw std::invalid_argument("power law needs alpha > 1 and xmin > 0");
                   }
                 },
             },
             params);
}

double log_pdf(const Params& params, double x) {
  return std::visit(
      Overloaded{
          [x](const LogNormalParams& p) {
            if (!(x > 0.0)) return kNegInf;
            const double lx = std::log(x);
            const double d = lx - p.mu;
            return -lx - 0.5 * std::log(2.0 * std::numbers::pi * p.sigma2) -
                   d * d / (2.0 * p.sigma2);
          },
          [x](const GammaParams& p) {
            if (!(x > 0.0)) return kNegInf;
            return (p.shape - 1.0) * std::log(x) - x / p.scale - std::lgamma(p.shape) -
                   p.shape * std::log(p.scale);
          },
          [x](const ExponentialParams& p) {
            if (x < 0.0) return kNegInf;
            return std::log(p.rate) - p.rate * x;
          },
          [x](const InverseGaussianParams& p) {
            if (!(x > 0.0)) return kNegInf;
            const double d = x - p.mean;
            return 0.5 * (std::log(p.shape) - std::log(2.0 * std::numbers::pi) -
                          3.0 * std::log(x)) -
                   p.shape * d * d / (2.0 * p.mean * p.mean * x);
          },
          [x](const PowerLawParams& p) {
            if (x < p.xmin) return kNegInf;
            return std::log(p.alpha - 1.0) - std::log(p.xmin) - p.alpha * std::log(x / p.xmin);
          },
      },
      params);
}

double pdf(const Params& params, double x) { return std::exp(log_pdf(params, x)); }

double cdf(const Params& params, double x) {
  return std::visit(
      Overloaded{
          [x](const LogNormalParams& p) {
            if (!(x > 0.0)) return 0.0;
            return phi((std::log(x) - p.mu) / std::sqrt(p.sigma2));
          },
          [x](const GammaParams& p) {
            if (!(x > 0.0)) return 0.0;
            return boost::math::gamma_p(p.shape, x / p.scale);
          },
          [x](const ExponentialParams& p) {
            if (!(x > 0.0)) return 0.0;
            return -std::expm1(-p.rate * x);
          },
          [x](const InverseGaussianParams& p) {
            if (!(x > 0.0)) return 0.0;
            if (std::isinf(x)) return 1.0;
            return boost::math::cdf(boost::math::inverse_gaussian(p.mean, p.shape), x);
          },
          [x](const PowerLawParams& p) {
            if (x <= p.xmin) return 0.0;
            return -std::expm1((1.0 - p.alpha) * std::log(x / p.xmin));
          },
      },
      params);
}

double support_lower(const Params& params) {
  if (const auto* p = std::get_if<PowerLawParams>(&params)) return p->xmin;
  return 0.0;
}

}  // namespace citymig::fit
