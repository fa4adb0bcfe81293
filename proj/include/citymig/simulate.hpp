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

#ifndef CITYMIG_SIMULATE_HPP_
#define CITYMIG_SIMULATE_HPP_

#include <cstdint>
#include <vector>

namespace citymig::fit {

// Hyper-parameters of the per-researcher migration rate delta ~ LogNormal.
// sigma2 = 0 is accepted as the homogeneous limit (every delta = e^mu).
struct PoissonLogNormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;

  void validate() const;
};

struct PoissonLogNormalSample {
  std::vector<double> rates;          // delta per researcher
  std::vector<std::uint64_t> counts;  // moves per researcher
  std::vector<double> event_times;    // pooled, ascending, in [0, horizon)
  std::vector<double> interarrivals;  // gaps of event_times, first from 0
};

// Draws delta_i, then k_i ~ Poisson(delta_i * horizon) with event times
// uniform on [0, horizon). Deterministic per seed.
PoissonLogNormalSample simulate_poisson_lognormal(const PoissonLogNormalParams& params,
                                                  std::size_t researchers, double horizon,
                                                  std::uint64_t seed);

// delta^k e^-delta / k!
double poisson_pmf(std::uint64_t k, double delta);

}  // namespace citymig::fit

#endif  // CITYMIG_SIMULATE_HPP_
