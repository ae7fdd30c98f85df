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

// Private hyperparameter selection.
//
// Both selectors are generic over the base mechanism: `run(candidate, mu,
// seed)` produces a result and `score(result, candidate)` evaluates it. The
// selectors own every privacy-relevant step (budget split, score noise,
// argmin), so fixed synthetic scores can exercise them directly.

#ifndef DPMARGIN_TUNING_HPP_
#define DPMARGIN_TUNING_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"
#include "dpmargin/loss.hpp"
#include "dpmargin/optimizer.hpp"
#include "dpmargin/parallel.hpp"
#include "dpmargin/privacy.hpp"
#include "dpmargin/random.hpp"
#include "dpmargin/tnb.hpp"

namespace dpmargin {

enum class ScoreKind { kEmpiricalZeroOne, kPenalizedPopulation };

inline const char* ToString(ScoreKind kind) {
  return kind == ScoreKind::kEmpiricalZeroOne ? "empirical" : "penalized";
}

// Summed zero-one loss has sensitivity 1 under replacement; the penalty is
// data independent and does not change it.
struct ScoreSpec {
  ScoreKind kind = ScoreKind::kEmpiricalZeroOne;
  double beta = 0.01;  // confidence of the penalized score
  double sensitivity = 1.0;
};

// 2.5 (k log(2n) + log(4/beta)).
inline double ComplexityPenalty(Eigen::Index k, std::size_t n, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  return 2.5 * (static_cast<double>(k) * std::log(2.0 * static_cast<double>(n)) +
                std::log(4.0 / beta));
}

inline double Score(const LinearModel& model, const Dataset& data,
                    const ScoreSpec& spec,
                    std::optional<Eigen::Index> candidate_k = std::nullopt) {
  const double errors =
      static_cast<double>(MisclassifiedCount(model.weights, data));
  if (spec.kind == ScoreKind::kEmpiricalZeroOne) return errors;
  if (!candidate_k) {
    throw Error("missing_context",
                "penalized score needs the candidate projection dimension");
  }
  return errors + ComplexityPenalty(*candidate_k, data.size(), spec.beta);
}

template <class Result>
struct TuneOutcome {
  Result result;                      // output of the selected run
  std::size_t candidate = 0;          // index into the candidate list
  std::size_t selected_run = 0;       // index into runs
  std::vector<std::size_t> run_candidates;  // candidate of each run
  std::vector<double> scores;         // noiseless score of each run
  std::vector<double> noisy_scores;   // score + Gaussian of each run
  double base_mu = 0.0;
  double score_sigma = 0.0;
};

namespace detail {

inline std::size_t FirstArgmin(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

template <class RunFn>
auto RunWithContext(RunFn& run, std::size_t candidate, double mu,
                    std::uint64_t seed) {
  try {
    return run(candidate, mu, seed);
  } catch (const Error& e) {
    throw Error(e.kind(),
                "candidate " + std::to_string(candidate) + ": " + e.what());
  }
}

}  // namespace detail

// Brute-force selection: every candidate runs once at mu / sqrt(2|Theta|) and
// its score receives N(0, 2|Theta| Delta^2 / mu^2) noise; the noisy argmin
// (first index on ties) wins. Total consumption is mu-GDP.
template <class RunFn, class ScoreFn>
auto IterTune(std::size_t num_candidates, RunFn run, ScoreFn score, double mu,
              double sensitivity, std::uint64_t seed, unsigned threads = 1) {
  using Result =
      std::decay_t<decltype(run(std::size_t{}, double{}, std::uint64_t{}))>;
  if (num_candidates == 0) throw DomainError("candidate list is empty");
  const CandidateBudget budget =
      PerCandidateBudget(mu, num_candidates, sensitivity);
  NoiseAudit::RecordInjected(NoiseSite::kIterScore, budget.score_sigma);

  std::vector<std::optional<Result>> results(num_candidates);
  std::vector<double> scores(num_candidates);
  ParallelFor(num_candidates, threads, [&](std::size_t i) {
    results[i] = detail::RunWithContext(run, i, budget.base_mu,
                                        DeriveSeed(seed, "iter/run", i));
    scores[i] = score(*results[i], i);
  });

  const std::uint64_t noise_key = DeriveSeed(seed, "iter/score-noise");
  TuneOutcome<Result> outcome{};
  outcome.noisy_scores.resize(num_candidates);
  for (std::size_t i = 0; i < num_candidates; ++i) {
    outcome.noisy_scores[i] =
        scores[i] + budget.score_sigma * GaussianAt(noise_key, i);
    outcome.run_candidates.push_back(i);
  }
  outcome.selected_run = detail::FirstArgmin(outcome.noisy_scores);
  outcome.candidate = outcome.selected_run;
  outcome.result = std::move(*results[outcome.selected_run]);
  outcome.scores = std::move(scores);
  outcome.base_mu = budget.base_mu;
  outcome.score_sigma = budget.score_sigma;
  return outcome;
}

inline constexpr std::uint64_t kDefaultRunCap = 1'000'000;

// Randomized repetition: K ~ TNB(1, r) runs, each on a uniformly drawn
// candidate at mu / sqrt(2) with N(0, 2 Delta^2 / mu^2) score noise; the noisy
// argmin (first run on ties) wins. Its (eps, delta) guarantee is
// TnbTunePrivacy(mu, r, delta).
template <class RunFn, class ScoreFn>
auto PrivTune(std::size_t num_candidates, RunFn run, ScoreFn score,
              const TnbDist& dist, double mu, double sensitivity,
              std::uint64_t seed, unsigned threads = 1,
              std::uint64_t run_cap = kDefaultRunCap) {
  using Result =
      std::decay_t<decltype(run(std::size_t{}, double{}, std::uint64_t{}))>;
  if (num_candidates == 0) throw DomainError("candidate list is empty");
  const std::uint64_t runs = SampleTnb(dist, DeriveSeed(seed, "priv/count"));
  if (runs > run_cap) {
    throw ResourceError("sampled " + std::to_string(runs) +
                        " tuning runs, above the cap of " +
                        std::to_string(run_cap));
  }
  const CandidateBudget budget = PrivTuneRunBudget(mu, sensitivity);
  NoiseAudit::RecordInjected(NoiseSite::kPrivTuneScore, budget.score_sigma);

  const std::uint64_t pick_key = DeriveSeed(seed, "priv/pick");
  TuneOutcome<Result> outcome{};
  outcome.run_candidates.resize(runs);
  for (std::uint64_t t = 0; t < runs; ++t) {
    outcome.run_candidates[t] = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(BitsAt(pick_key, t)) * num_candidates) >>
        64);
  }

  std::vector<std::optional<Result>> results(runs);
  std::vector<double> scores(runs);
  ParallelFor(runs, threads, [&](std::size_t t) {
    const std::size_t c = outcome.run_candidates[t];
    results[t] = detail::RunWithContext(run, c, budget.base_mu,
                                        DeriveSeed(seed, "priv/run", t));
    scores[t] = score(*results[t], c);
  });

  const std::uint64_t noise_key = DeriveSeed(seed, "priv/score-noise");
  outcome.noisy_scores.resize(runs);
  for (std::uint64_t t = 0; t < runs; ++t) {
    outcome.noisy_scores[t] =
        scores[t] + budget.score_sigma * GaussianAt(noise_key, t);
  }
  outcome.selected_run = detail::FirstArgmin(outcome.noisy_scores);
  outcome.candidate = outcome.run_candidates[outcome.selected_run];
  outcome.result = std::move(*results[outcome.selected_run]);
  outcome.scores = std::move(scores);
  outcome.base_mu = budget.base_mu;
  outcome.score_sigma = budget.score_sigma;
  return outcome;
}

}  // namespace dpmargin

#endif  // DPMARGIN_TUNING_HPP_
