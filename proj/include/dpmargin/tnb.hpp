//
// Copyright 2026 The dpmargin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Truncated negative binomial run-count law TNB(eta, r) on {1, 2, ...}.
// Closed forms are provided for eta = 1 (geometric) and eta = 0
// (logarithmic); sampling is provided for eta = 1.

#ifndef DPMARGIN_TNB_HPP_
#define DPMARGIN_TNB_HPP_

#include <cmath>
#include <cstdint>
#include <limits>

#include "dpmargin/error.hpp"
#include "dpmargin/random.hpp"

namespace dpmargin {

struct TnbDist {
  double eta = 1.0;
  double r = 0.5;

  TnbDist(double eta_value, double r_value) : eta(eta_value), r(r_value) {
    if (!(eta > -1.0)) throw DomainError("TNB eta must exceed -1");
    if (!(r > 0.0 && r < 1.0)) throw DomainError("TNB r must lie in (0,1)");
  }

  static TnbDist Geometric(double r) { return TnbDist(1.0, r); }
};

namespace detail {
inline void CheckClosedForm(const TnbDist& dist) {
  if (dist.eta != 0.0 && dist.eta != 1.0) {
    throw DomainError("TNB closed forms are implemented for eta in {0, 1}");
  }
}
}  // namespace detail

inline double TnbPmf(const TnbDist& dist, std::uint64_t k) {
  detail::CheckClosedForm(dist);
  if (k == 0) return 0.0;
  const double kk = static_cast<double>(k);
  if (dist.eta == 1.0) return dist.r * std::pow(1.0 - dist.r, kk - 1.0);
  return std::pow(1.0 - dist.r, kk) / (kk * std::log(1.0 / dist.r));
}

inline double TnbMean(const TnbDist& dist) {
  detail::CheckClosedForm(dist);
  if (dist.eta == 1.0) return 1.0 / dist.r;
  return (1.0 / dist.r - 1.0) / std::log(1.0 / dist.r);
}

// Probability generating function E[x^K], x in [0, 1].
inline double TnbPgf(const TnbDist& dist, double x) {
  detail::CheckClosedForm(dist);
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("PGF argument must lie in [0,1]");
  const double q = 1.0 - (1.0 - dist.r) * x;
  if (dist.eta == 1.0) return (1.0 / q - 1.0) / (1.0 / dist.r - 1.0);
  return std::log(q) / std::log(dist.r);
}

// P(K <= t) for the geometric case.
inline double TnbCdf(const TnbDist& dist, std::uint64_t t) {
  if (dist.eta != 1.0) throw DomainError("TNB CDF is implemented for eta = 1");
  return 1.0 - std::pow(1.0 - dist.r, static_cast<double>(t));
}

// Probability that a fixed candidate out of grid_size is never drawn:
// PGF(1 - 1/grid_size).
inline double TnbNotSelectedProb(const TnbDist& dist, std::size_t grid_size) {
  if (grid_size == 0) throw DomainError("grid size must be positive");
  return TnbPgf(dist, 1.0 - 1.0 / static_cast<double>(grid_size));
}

// Largest geometric rate r with non-selection probability <= beta:
// r = beta / ((1 - beta)(grid_size - 1)). Unconstrained (1) for one candidate.
inline double TnbMaxRate(double beta, std::size_t grid_size) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  if (grid_size == 0) throw DomainError("grid size must be positive");
  if (grid_size == 1) return 1.0;
  return beta / ((1.0 - beta) * static_cast<double>(grid_size - 1));
}

// ceil(log(beta) / log(1 - r)): P(K > threshold) <= beta.
inline std::uint64_t TnbTailThreshold(double r, double beta) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("r must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  return static_cast<std::uint64_t>(std::ceil(std::log(beta) / std::log1p(-r)));
}

// Inverse-CDF draw K = ceil(log(u) / log(1 - r)), u ~ Uniform(0, 1).
inline std::uint64_t SampleTnb(const TnbDist& dist, std::uint64_t seed) {
  if (dist.eta != 1.0) {
    throw DomainError("TNB sampling is implemented for eta = 1 only");
  }
  const double u = UniformAt(DeriveSeed(seed, "tnb/sample"), 0);
  const double k = std::ceil(std::log(u) / std::log1p(-dist.r));
  constexpr double kMax = 9.0e18;
  if (!(k < kMax)) return static_cast<std::uint64_t>(kMax);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

}  // namespace dpmargin

#endif  // DPMARGIN_TNB_HPP_
