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

#include "citymig/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace citymig::fit {

void PoissonLogNormalParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma2) || sigma2 < 0.0) {
    throw std::invalid_argument("Poisson-log-normal needs finite mu and sigma2 >= 0");
  }
}

PoissonLogNormalSample simulate_poisson_lognormal(const PoissonLogNormalParams& params,
                                                  std::size_t researchers, double horizon,
                                                  std::uint64_t seed) {
  params.validate();
  if (researchers == 0) throw std::invalid_argument("need at least one researcher");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(params.mu, std::sqrt(params.sigma2));
  std::uniform_real_distribution<double> uniform(0.0, horizon);

  PoissonLogNormalSample out;
  out.rates.reserve(researchers);
  out.counts.reserve(researchers);
  for (std::size_t i = 0; i < researchers; ++i) {
    const double delta = params.sigma2 == 0.0 ? std::exp(params.mu) : std::exp(normal(rng));
    std::poisson_distribution<std::uint64_t> poisson(delta * horizon);
    const std::uint64_t k = poisson(rng);
    out.rates.push_back(delta);
    out.counts.push_back(k);
    for (std::uint64_t e = 0; e < k; ++e) out.event_times.push_back(uniform(rng));
  }
  std::sort(out.event_times.begin(), out.event_times.end());
  out.interarrivals.reserve(out.event_times.size());
  double prev = 0.0;
  for (double t : out.event_times) {
    out.interarrivals.push_back(t - prev);
    prev = t;
  }
  return out;
}

double poisson_pmf(std::uint64_t k, double delta) {
  if (!(delta > 0.0)) {
    if (delta == 0.0) return k == 0 ? 1.0 : 0.0;
    throw std::invalid_argument("Poisson rate must be nonnegative");
  }
  const double dk = static_cast<double>(k);
  return std::exp(dk * std::log(delta) - delta - std::lgamma(dk + 1.0));
}

}  // namespace citymig::fit
