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

#ifndef CITYMIG_DISTRIBUTIONS_HPP_
#define CITYMIG_DISTRIBUTIONS_HPP_

#include <array>
#include <optional>
#include <string_view>
#include <variant>

namespace citymig::fit {

enum class Family {
  kLogNormal,
  kGamma,
  kExponential,
  kInverseGaussian,
  kPowerLaw,
};

inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::kLogNormal, Family::kGamma, Family::kExponential, Family::kInverseGaussian,
    Family::kPowerLaw};

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view name);

// Number of free parameters, used for the BIC penalty.
int parameter_count(Family family);

// mu and sigma2 are the mean and variance of ln(x).
struct LogNormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;
};

struct ExponentialParams {
  double rate = 1.0;
};

struct InverseGaussianParams {
  double mean = 1.0;
  double shape = 1.0;
};

// Continuous power law on [xmin, inf).
struct PowerLawParams {
  double alpha = 2.0;
  double xmin = 1.0;
};

using Params = std::variant<LogNormalParams, GammaParams, ExponentialParams,
                            InverseGaussianParams, PowerLawParams>;

Family family_of(const Params& params);

// Throws std::invalid_argument when parameters are outside their domain.
void validate(const Params& params);

// Natural-log density; -inf outside the support.
double log_pdf(const Params& params, double x);
double pdf(const Params& params, double x);
double cdf(const Params& params, double x);

// Lower end of the support (0, or xmin for the power law).
double support_lower(const Params& params);

}  // namespace citymig::fit

#endif  // CITYMIG_DISTRIBUTIONS_HPP_
