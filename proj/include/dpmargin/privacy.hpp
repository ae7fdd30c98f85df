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

// Gaussian differential privacy accounting. All logarithms are natural.
//
// Every Gaussian noise scale used by the optimizer and the tuners is computed
// here. Consumers additionally report the scale they actually inject, so an
// installed NoiseAudit can check that injected noise always matches a
// calibrated value.

#ifndef DPMARGIN_PRIVACY_HPP_
#define DPMARGIN_PRIVACY_HPP_

#include <atomic>
#include <cmath>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"

namespace dpmargin {

struct GdpBudget {
  double mu;

  explicit GdpBudget(double value) : mu(value) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw PreconditionError("GDP budget mu must be positive and finite, got " +
                              FormatDouble(value));
    }
  }
};

struct ApproxDp {
  double epsilon;
  double delta;

  ApproxDp(double eps, double del) : epsilon(eps), delta(del) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw PreconditionError("epsilon must be positive, got " +
                              FormatDouble(eps));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw PreconditionError("delta must lie in (0,1), got " +
                              FormatDouble(del));
    }
  }
};

enum class NoiseSite { kOptimizer, kIterScore, kPrivTuneScore };

struct NoiseEvent {
  NoiseSite site;
  double sigma;
};

// Collects calibrated and injected noise scales while alive. At most one audit
// may be installed at a time.
class NoiseAudit {
 public:
  NoiseAudit() {
    NoiseAudit* expected = nullptr;
    if (!Current().compare_exchange_strong(expected, this)) {
      throw Error("audit_error", "a NoiseAudit is already installed");
    }
  }
  ~NoiseAudit() { Current().store(nullptr); }
  NoiseAudit(const NoiseAudit&) = delete;
  NoiseAudit& operator=(const NoiseAudit&) = delete;

  std::vector<NoiseEvent> calibrated() const {
    std::lock_guard lock(mu_);
    return calibrated_;
  }
  std::vector<NoiseEvent> injected() const {
    std::lock_guard lock(mu_);
    return injected_;
  }

  // True when every injected scale equals (bitwise) a calibrated scale from
  // the same site.
  bool InjectedMatchesCalibrated() const {
    std::lock_guard lock(mu_);
    for (const auto& inj : injected_) {
      bool found = false;
      for (const auto& cal : calibrated_) {
        if (cal.site == inj.site && cal.sigma == inj.sigma) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  static void RecordCalibrated(NoiseSite site, double sigma) {
    if (auto* audit = Current().load()) {
      std::lock_guard lock(audit->mu_);
      audit->calibrated_.push_back({site, sigma});
    }
  }
  static void RecordInjected(NoiseSite site, double sigma) {
    if (auto* audit = Current().load()) {
      std::lock_guard lock(audit->mu_);
      audit->injected_.push_back({site, sigma});
    }
  }

 private:
  static std::atomic<NoiseAudit*>& Current() {
    static std::atomic<NoiseAudit*> current{nullptr};
    return current;
  }

  mutable std::mutex mu_;
  std::vector<NoiseEvent> calibrated_;
  std::vector<NoiseEvent> injected_;
};

namespace detail {
inline void CheckDelta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("delta must lie in (0,1), got " +
                            FormatDouble(delta));
  }
}
inline void CheckMu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw PreconditionError("mu must be positive and finite, got " +
                            FormatDouble(mu));
  }
}
}  // namespace detail

// Root-sum-of-squares composition of GDP mechanisms.
inline double ComposeGdp(std::span<const double> mus) {
  if (mus.empty()) throw PreconditionError("cannot compose an empty list");
  double total = 0.0;
  for (double mu : mus) {
    detail::CheckMu(mu);
    total += mu * mu;
  }
  return std::sqrt(total);
}

// mu-GDP implies (eps, delta)-DP with eps = mu^2/2 + mu sqrt(2 log(1/delta)).
inline double GdpToApproxDp(double mu, double delta) {
  detail::CheckMu(mu);
  detail::CheckDelta(delta);
  return 0.5 * mu * mu + mu * std::sqrt(2.0 * std::log(1.0 / delta));
}

// Linear relaxation eps = 2 mu sqrt(2 log(1/delta)), valid for
// mu <= 2 sqrt(2 log(1/delta)).
inline double GdpToApproxDpHighPrivacy(double mu, double delta) {
  detail::CheckMu(mu);
  detail::CheckDelta(delta);
  const double root = std::sqrt(2.0 * std::log(1.0 / delta));
  if (mu > 2.0 * root) {
    throw PreconditionError("high-privacy conversion needs mu <= 2 sqrt(2 "
                            "log(1/delta)) = " +
                            FormatDouble(2.0 * root) + ", got mu=" +
                            FormatDouble(mu));
  }
  return 2.0 * mu * root;
}

// Total GDP budget of the brute-force tuner: mu = eps / (2 sqrt(2 log(1/delta)))
// for 0 < eps <= 8 log(1/delta).
inline double MasterIterBudget(double epsilon, double delta) {
  detail::CheckDelta(delta);
  const double log_inv = std::log(1.0 / delta);
  if (!(epsilon > 0.0) || epsilon > 8.0 * log_inv) {
    throw PreconditionError("epsilon must lie in (0, 8 log(1/delta)] = (0, " +
                            FormatDouble(8.0 * log_inv) + "], got " +
                            FormatDouble(epsilon));
  }
  return epsilon / (2.0 * std::sqrt(2.0 * log_inv));
}

struct CandidateBudget {
  double base_mu;      // budget of each base run
  double score_sigma;  // std of the Gaussian added to each score
};

// Brute-force tuner split: 2|Theta| mechanisms at mu / sqrt(2|Theta|) each,
// which compose back to mu.
inline CandidateBudget PerCandidateBudget(double mu, std::size_t grid_size,
                                          double sensitivity = 1.0) {
  detail::CheckMu(mu);
  if (grid_size == 0) throw PreconditionError("grid size must be positive");
  if (!(sensitivity > 0.0)) {
    throw PreconditionError("score sensitivity must be positive");
  }
  const double two_grid = 2.0 * static_cast<double>(grid_size);
  CandidateBudget budget{mu / std::sqrt(two_grid),
                         sensitivity * std::sqrt(two_grid) / mu};
  NoiseAudit::RecordCalibrated(NoiseSite::kIterScore, budget.score_sigma);
  return budget;
}

// Per-run split inside the randomized-repetition tuner: the base run at
// mu/sqrt(2) and a score Gaussian with std sensitivity * sqrt(2) / mu.
inline CandidateBudget PrivTuneRunBudget(double mu, double sensitivity = 1.0) {
  detail::CheckMu(mu);
  if (!(sensitivity > 0.0)) {
    throw PreconditionError("score sensitivity must be positive");
  }
  CandidateBudget budget{mu / std::sqrt(2.0),
                         sensitivity * std::sqrt(2.0) / mu};
  NoiseAudit::RecordCalibrated(NoiseSite::kPrivTuneScore, budget.score_sigma);
  return budget;
}

// Per-coordinate noise of noisy gradient descent: Delta sqrt(T) / mu, which
// makes T Gaussian releases of a Delta-sensitive gradient compose to mu-GDP.
inline double NgdNoiseScale(double sensitivity, std::uint64_t iterations,
                            double mu) {
  detail::CheckMu(mu);
  if (!(sensitivity > 0.0)) {
    throw PreconditionError("gradient sensitivity must be positive");
  }
  if (iterations == 0) throw PreconditionError("iteration count must be >= 1");
  const double sigma =
      sensitivity * std::sqrt(static_cast<double>(iterations)) / mu;
  NoiseAudit::RecordCalibrated(NoiseSite::kOptimizer, sigma);
  return sigma;
}

// Privacy of the geometric-repetition tuner with mu-GDP runs:
// eps = 1.5 mu^2 + 3 mu sqrt(2 log(1/(r delta))) + delta.
inline double TnbTunePrivacy(double mu, double r, double delta) {
  detail::CheckMu(mu);
  detail::CheckDelta(delta);
  if (!(r > 0.0 && r < 1.0)) throw PreconditionError("r must lie in (0,1)");
  return 1.5 * mu * mu + 3.0 * mu * std::sqrt(2.0 * std::log(1.0 / (r * delta))) +
         delta;
}

// Relaxation eps = 6 mu sqrt(2 log(1/(r delta))) + delta, valid for
// mu <= 2 sqrt(2 log(1/(r delta))).
inline double TnbTunePrivacySimplified(double mu, double r, double delta) {
  detail::CheckMu(mu);
  detail::CheckDelta(delta);
  if (!(r > 0.0 && r < 1.0)) throw PreconditionError("r must lie in (0,1)");
  const double root = std::sqrt(2.0 * std::log(1.0 / (r * delta)));
  if (mu > 2.0 * root) {
    throw PreconditionError(
        "simplified tuner bound needs mu <= 2 sqrt(2 log(1/(r delta))) = " +
        FormatDouble(2.0 * root) + ", got mu=" + FormatDouble(mu));
  }
  return 6.0 * mu * root + delta;
}

struct TnbBudget {
  double mu;
  double r;
};

// Budget of the randomized-repetition master mechanism:
// r = 1/(|Theta| (n^2 - 1)), mu = eps / (6 sqrt(2 log(|Theta|(n^2-1)/delta))),
// for eps in (delta, 24 log(|Theta|(n^2-1)/delta)).
inline TnbBudget MasterTnbBudget(double epsilon, double delta,
                                 std::size_t grid_size, std::size_t n) {
  detail::CheckDelta(delta);
  if (grid_size == 0) throw PreconditionError("grid size must be positive");
  if (n < 2) throw PreconditionError("n must be at least 2");
  const double nn = static_cast<double>(n);
  const double inv_r = static_cast<double>(grid_size) * (nn * nn - 1.0);
  const double log_term = std::log(inv_r / delta);
  if (!(epsilon > delta) || !(epsilon < 24.0 * log_term)) {
    throw PreconditionError("epsilon must lie in (delta, 24 log(|Theta|(n^2-1)/"
                            "delta)) = (" +
                            FormatDouble(delta) + ", " +
                            FormatDouble(24.0 * log_term) + "), got " +
                            FormatDouble(epsilon));
  }
  return {epsilon / (6.0 * std::sqrt(2.0 * log_term)), 1.0 / inv_r};
}

}  // namespace dpmargin

#endif  // DPMARGIN_PRIVACY_HPP_
