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

// The adaptive-margin master mechanism: a data-independent doubling grid of
// margin candidates, one JL projection per candidate, JL-projected noisy
// gradient descent as the base mechanism and a private selector on top.

#ifndef DPMARGIN_MASTER_HPP_
#define DPMARGIN_MASTER_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"
#include "dpmargin/optimizer.hpp"
#include "dpmargin/oracle.hpp"
#include "dpmargin/privacy.hpp"
#include "dpmargin/projection.hpp"
#include "dpmargin/tnb.hpp"
#include "dpmargin/tuning.hpp"

namespace dpmargin {

enum class TunerKind { kIterate, kPrivTune };

inline const char* ToString(TunerKind kind) {
  return kind == TunerKind::kIterate ? "iterate" : "priv-tune";
}

struct MasterConfig {
  double epsilon = 1.0;
  double delta = 1e-5;
  TunerKind tuner = TunerKind::kIterate;
  ScoreKind score = ScoreKind::kEmpiricalZeroOne;
  // Defaults: last iterate for the penalized score, averaged otherwise.
  std::optional<OutputMode> output_mode;
  std::optional<double> jl_failure_beta;  // default 1/n^2
  std::optional<double> score_beta;       // default 1/n^2
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double jl_constant = kDefaultJlConstant;
  // Use the identity map when the JL dimension would not be below d.
  bool identity_when_not_reducing = true;
  NgdOptions ngd;
  std::uint64_t run_cap = kDefaultRunCap;
  // Receives "sample_jl:<i>" and "base_run:<i>" events; must be thread safe.
  std::function<void(std::string_view)> observer;

  OutputMode ResolvedOutputMode() const {
    if (output_mode) return *output_mode;
    return score == ScoreKind::kPenalizedPopulation ? OutputMode::kLastIterate
                                                    : OutputMode::kAveraged;
  }
};

// {b/n, 2b/n, 4b/n, ..., 2^floor(log2 n) b/n} and b, ascending, without
// duplicates.
inline std::vector<double> MarginGrid(std::size_t n, double b) {
  if (n < 2) throw DomainError("margin grid needs n >= 2");
  if (!(b > 0.0)) throw DomainError("norm bound must be positive");
  const int top = std::bit_width(n) - 1;  // floor(log2 n)
  std::vector<double> grid;
  for (int i = 0; i <= top; ++i) {
    grid.push_back(b * (std::ldexp(1.0, i) / static_cast<double>(n)));
  }
  if (grid.back() != b) grid.push_back(b);
  return grid;
}

struct Candidate {
  double gamma = 0.0;
  std::uint64_t formula_k = 0;  // projection dimension from ProjectionDim
  JlMatrix phi;
};

inline std::uint64_t CandidateJlSeed(std::uint64_t master_seed, double gamma) {
  return DeriveSeed(master_seed, "master/jl", std::bit_cast<std::uint64_t>(gamma));
}

// Candidates depend only on the public (n, d, b) and the configuration, never
// on the data values.
inline std::vector<Candidate> BuildCandidates(std::size_t n, Eigen::Index d,
                                              double b,
                                              const MasterConfig& cfg) {
  const std::vector<double> grid = MarginGrid(n, b);
  const double nn = static_cast<double>(n);
  const double beta = cfg.jl_failure_beta.value_or(1.0 / (nn * nn));
  std::vector<Candidate> candidates;
  candidates.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gamma = grid[i];
    const std::uint64_t k =
        ProjectionDim(gamma, n, grid.size(), beta, b, cfg.jl_constant);
    const std::uint64_t seed = CandidateJlSeed(cfg.seed, gamma);
    if (cfg.observer) cfg.observer("sample_jl:" + std::to_string(i));
    if (cfg.identity_when_not_reducing && k >= static_cast<std::uint64_t>(d)) {
      candidates.push_back({gamma, k, JlMatrix::Identity(d, seed)});
    } else {
      candidates.push_back(
          {gamma, k, JlMatrix::Sample(static_cast<Eigen::Index>(k), d, seed)});
    }
  }
  return candidates;
}

struct PrivacyLedger {
  TunerKind tuner = TunerKind::kIterate;
  std::size_t grid_size = 0;
  double mu = 0.0;            // total GDP budget handed to the selector
  double base_mu = 0.0;       // budget of each base run
  double score_sigma = 0.0;   // std of the score noise
  double composed_mu = 0.0;   // composition of the per-run pieces
  std::optional<double> r;    // geometric run-count rate (priv-tune)
  double epsilon_granted = 0.0;
  double delta_granted = 0.0;
  bool round_trip_ok = false;  // accounting reproduces the requested budget
  std::string statement;
};

inline constexpr double kRoundTripTol = 1e-12;

// Budget ledger for a dataset of size n. Throws PreconditionError when
// (epsilon, delta) is not admissible for the tuner.
inline PrivacyLedger BuildLedger(std::size_t n, std::size_t grid_size,
                                 double epsilon, double delta, TunerKind tuner,
                                 double score_sensitivity = 1.0) {
  PrivacyLedger ledger;
  ledger.tuner = tuner;
  ledger.grid_size = grid_size;
  ledger.delta_granted = delta;
  if (tuner == TunerKind::kIterate) {
    ledger.mu = MasterIterBudget(epsilon, delta);
    const CandidateBudget split =
        PerCandidateBudget(ledger.mu, grid_size, score_sensitivity);
    ledger.base_mu = split.base_mu;
    ledger.score_sigma = split.score_sigma;
    // Each candidate spends base_mu on training and base_mu on its noisy score.
    const std::vector<double> pieces(2 * grid_size, split.base_mu);
    ledger.composed_mu = ComposeGdp(pieces);
    const double eps_back = GdpToApproxDpHighPrivacy(ledger.composed_mu, delta);
    ledger.round_trip_ok =
        std::abs(ledger.composed_mu - ledger.mu) <= kRoundTripTol * ledger.mu &&
        std::abs(eps_back - epsilon) <= kRoundTripTol * epsilon;
    ledger.epsilon_granted = epsilon;
    ledger.statement = "(" + FormatDouble(epsilon) + ", " +
                       FormatDouble(delta) + ")-DP";
  } else {
    const TnbBudget budget = MasterTnbBudget(epsilon, delta, grid_size, n);
    ledger.mu = budget.mu;
    ledger.r = budget.r;
    const CandidateBudget split = PrivTuneRunBudget(budget.mu, score_sensitivity);
    ledger.base_mu = split.base_mu;
    ledger.score_sigma = split.score_sigma;
    const double pieces[] = {split.base_mu, split.base_mu};
    ledger.composed_mu = ComposeGdp(pieces);
    const double eps_back =
        TnbTunePrivacySimplified(ledger.composed_mu, budget.r, delta);
    ledger.round_trip_ok =
        std::abs(ledger.composed_mu - ledger.mu) <= kRoundTripTol * ledger.mu &&
        std::abs(eps_back - (epsilon + delta)) <=
            kRoundTripTol * (epsilon + delta);
    ledger.epsilon_granted = epsilon + delta;
    ledger.statement = "(" + FormatDouble(epsilon + delta) + ", " +
                       FormatDouble(delta) + ")-DP";
  }
  return ledger;
}

struct MasterResult {
  LinearModel model;  // lifted to the ambient dimension
  double gamma_out = 0.0;
  std::uint64_t jl_seed = 0;
  Eigen::Index k = 0;
  std::uint64_t formula_k = 0;
  bool identity_projection = false;
  PrivacyLedger ledger;
  std::vector<double> grid;
  std::vector<std::size_t> run_candidates;
  std::vector<double> scores;
  std::vector<double> noisy_scores;
};

// Privately selects a margin candidate and returns its lifted linear model.
// Deterministic given (data, cfg) for any thread count.
inline MasterResult DpAdaptiveMargin(const Dataset& data,
                                     const MasterConfig& cfg) {
  const std::size_t n = data.size();
  const double b = data.norm_bound();
  const std::vector<double> grid = MarginGrid(n, b);
  const double nn = static_cast<double>(n);
  ScoreSpec score_spec{cfg.score, cfg.score_beta.value_or(1.0 / (nn * nn)), 1.0};
  const PrivacyLedger ledger = BuildLedger(n, grid.size(), cfg.epsilon,
                                           cfg.delta, cfg.tuner,
                                           score_spec.sensitivity);
  const std::vector<Candidate> candidates =
      BuildCandidates(n, data.dim(), b, cfg);
  const OutputMode mode = cfg.ResolvedOutputMode();

  auto run = [&](std::size_t i, double mu, std::uint64_t seed) {
    if (cfg.observer) cfg.observer("base_run:" + std::to_string(i));
    const Candidate& cand = candidates[i];
    LinearModel model =
        Jlgd(cand.phi, cand.gamma / 3.0, data, mu, mode, seed, cfg.ngd);
    model.provenance.gamma = cand.gamma;
    return model;
  };
  auto score = [&](const LinearModel& model, std::size_t i) {
    return Score(model, data, score_spec, candidates[i].phi.k());
  };

  const std::uint64_t tune_seed = DeriveSeed(cfg.seed, "master/tune");
  TuneOutcome<LinearModel> outcome =
      cfg.tuner == TunerKind::kIterate
          ? IterTune(candidates.size(), run, score, ledger.mu,
                     score_spec.sensitivity, tune_seed, cfg.threads)
          : PrivTune(candidates.size(), run, score,
                     TnbDist::Geometric(*ledger.r), ledger.mu,
                     score_spec.sensitivity, tune_seed, cfg.threads,
                     cfg.run_cap);

  const Candidate& winner = candidates[outcome.candidate];
  MasterResult result;
  result.model = std::move(outcome.result);
  result.gamma_out = winner.gamma;
  result.jl_seed = winner.phi.seed();
  result.k = winner.phi.k();
  result.formula_k = winner.formula_k;
  result.identity_projection = winner.phi.is_identity();
  result.ledger = ledger;
  result.grid = grid;
  result.run_candidates = std::move(outcome.run_candidates);
  result.scores = std::move(outcome.scores);
  result.noisy_scores = std::move(outcome.noisy_scores);
  return result;
}

struct CompetitivenessReport {
  double grid_min = 0.0;
  double continuous_min = 0.0;
  double ratio = 0.0;
};

// Compares the best doubling-grid bound
//   min_{gamma in grid} min(1, m(gamma)/(n gamma) + 1/(n gamma^2 eps))
// with the best bound over every removal set R with gamma_R = margin(S \ R) > 0,
// both computed with the exhaustive oracles. m(gamma) is the minimum number of
// margin outliers at gamma.
inline CompetitivenessReport GridCompetitivenessCheck(
    const Dataset& data, double epsilon, double tol = kDefaultOracleTol) {
  constexpr std::size_t kMaxPoints = 12;
  const std::size_t n = data.size();
  if (n > kMaxPoints) {
    throw SizeError("grid competitiveness check supports n <= " +
                    std::to_string(kMaxPoints));
  }
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double nn = static_cast<double>(n);
  auto bound = [&](double removed, double gamma) {
    return std::min(1.0, removed / (nn * gamma) + 1.0 / (nn * gamma * gamma * epsilon));
  };

  CompetitivenessReport report;
  report.grid_min = std::numeric_limits<double>::infinity();
  for (double gamma : MarginGrid(n, data.norm_bound())) {
    const OutlierWitness w = MinOutliersOracle(data, gamma, tol);
    report.grid_min =
        std::min(report.grid_min, bound(static_cast<double>(w.count), gamma));
  }

  report.continuous_min = std::numeric_limits<double>::infinity();
  const RowMatrix z = data.SignedPoints();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) keep.push_back(i);
    }
    if (keep.empty()) continue;
    const double gamma = SubsetMargin(z, keep, tol);
    if (!(gamma > tol)) continue;
    const double removed = static_cast<double>(n - keep.size());
    report.continuous_min = std::min(report.continuous_min, bound(removed, gamma));
  }
  report.ratio = report.grid_min / report.continuous_min;
  return report;
}

}  // namespace dpmargin

#endif  // DPMARGIN_MASTER_HPP_
