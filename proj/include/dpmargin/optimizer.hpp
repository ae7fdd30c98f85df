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

// Noisy full-batch subgradient descent on the summed hinge loss, and its
// JL-projected wrapper.

#ifndef DPMARGIN_OPTIMIZER_HPP_
#define DPMARGIN_OPTIMIZER_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "dpmargin/data.hpp"
#include "dpmargin/error.hpp"
#include "dpmargin/loss.hpp"
#include "dpmargin/privacy.hpp"
#include "dpmargin/projection.hpp"
#include "dpmargin/random.hpp"

namespace dpmargin {

enum class OutputMode { kAveraged, kLastIterate };

inline const char* ToString(OutputMode mode) {
  return mode == OutputMode::kAveraged ? "averaged" : "last";
}

inline constexpr std::uint64_t kDefaultIterationCap = 10'000'000;
inline constexpr double kDefaultBetaOpt = 0.01;

// Test-only replacements for the calibrated schedule. Overriding the
// iteration count alone keeps sigma = Delta sqrt(T) / mu.
struct NgdOverrides {
  std::optional<std::uint64_t> iterations;
  std::optional<double> sigma;
  std::optional<double> step_size;
};

struct NgdOptions {
  std::uint64_t iteration_cap = kDefaultIterationCap;
  double beta_opt = kDefaultBetaOpt;
  NgdOverrides overrides;
};

struct Provenance {
  std::optional<double> gamma;  // margin candidate, when tuned
  double confidence_margin = 0.0;
  std::optional<std::uint64_t> jl_seed;
  Eigen::Index k = 0;  // dimension the optimizer ran in
  bool identity_projection = false;
  OutputMode output_mode = OutputMode::kAveraged;
  double mu = 0.0;  // GDP budget consumed
  std::uint64_t iterations = 0;
  double sigma = 0.0;
  double step_size = 0.0;
};

struct LinearModel {
  Vector weights;
  Eigen::Index ambient_dim = 0;
  Provenance provenance;
};

struct NgdSchedule {
  std::uint64_t iterations;
  double sigma;
  double step_size;
  double sensitivity;
};

// Resolves T, sigma and the step size for a run on `data` (dimension k).
inline NgdSchedule ResolveNgdSchedule(const Dataset& data, double c, double mu,
                                      double ref_norm, OutputMode mode,
                                      const NgdOptions& options) {
  detail::CheckMu(mu);
  if (!(ref_norm > 0.0)) throw DomainError("reference norm must be positive");
  if (!(options.beta_opt > 0.0 && options.beta_opt < 1.0)) {
    throw DomainError("beta_opt must lie in (0,1)");
  }
  const double n = static_cast<double>(data.size());
  const double delta =
      HingeSensitivity(data.norm_bound(), c, NeighborRelation::kAddRemove);

  std::uint64_t iterations = 0;
  if (options.overrides.iterations) {
    iterations = *options.overrides.iterations;
    if (iterations == 0) throw DomainError("iteration override must be >= 1");
  } else {
    const double root = n * mu;
    const double t = std::ceil(root * root);
    if (!(t <= static_cast<double>(options.iteration_cap))) {
      throw ResourceError(
          "noisy gradient descent needs T = ceil(n^2 mu^2) = " +
          FormatDouble(t) + " iterations, above the cap of " +
          std::to_string(options.iteration_cap) +
          "; raise the cap (DPMARGIN_T_CAP) or override T");
    }
    iterations = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(t));
  }

  const double sigma = options.overrides.sigma
                           ? *options.overrides.sigma
                           : NgdNoiseScale(delta, iterations, mu);
  if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");

  double step = 0.0;
  if (options.overrides.step_size) {
    step = *options.overrides.step_size;
  } else {
    const double k = static_cast<double>(data.dim());
    double noise_term = k * sigma * sigma;
    if (mode == OutputMode::kLastIterate) {
      noise_term *= std::log(1.0 / options.beta_opt);
    }
    step = std::sqrt(ref_norm * ref_norm /
                     (static_cast<double>(iterations) *
                      (n * n * delta * delta + noise_term)));
  }
  return {iterations, sigma, step, delta};
}

// w_0 = 0; w_{t+1} = w_t - eta (sum_i grad hinge_c(w_t; p_i) + xi_t) with
// xi_t ~ N(0, sigma^2 I). Returns the mean of w_0..w_{T-1} (averaged) or w_T
// (last iterate). Noise for (t, coordinate j) is draw t*k + j of a stream keyed
// on the seed.
inline LinearModel Ngd(const LossSpec& spec, const Dataset& data, double mu,
                       double ref_norm, OutputMode mode, std::uint64_t seed,
                       const NgdOptions& options = {}) {
  if (spec.kind != LossKind::kHinge) {
    throw DomainError("noisy gradient descent runs on the hinge loss");
  }
  const double c = spec.confidence_margin;
  const NgdSchedule schedule =
      ResolveNgdSchedule(data, c, mu, ref_norm, mode, options);
  NoiseAudit::RecordInjected(NoiseSite::kOptimizer, schedule.sigma);

  const Eigen::Index k = data.dim();
  const auto uk = static_cast<std::uint64_t>(k);
  const std::uint64_t key = DeriveSeed(seed, "ngd/noise");
  const auto& x = data.features();
  Vector labels(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    labels(static_cast<Eigen::Index>(i)) = data.label(i);
  }
  const Vector neg_labels_over_c = -labels / c;

  Vector w = Vector::Zero(k);
  Vector sum = Vector::Zero(k);
  Vector step_dir(k);
  Vector coeff(labels.size());
  for (std::uint64_t t = 0; t < schedule.iterations; ++t) {
    if (mode == OutputMode::kAveraged) sum += w;
    const Vector scores = (x * w).cwiseProduct(labels);
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      coeff(i) = 1.0 - scores(i) / c > 0.0 ? neg_labels_over_c(i) : 0.0;
    }
    step_dir.noalias() = x.transpose() * coeff;
    if (schedule.sigma > 0.0) {
      const std::uint64_t base = t * uk;
      for (Eigen::Index j = 0; j < k; ++j) {
        step_dir(j) += schedule.sigma *
                       GaussianAt(key, base + static_cast<std::uint64_t>(j));
      }
    }
    w -= schedule.step_size * step_dir;
  }

  LinearModel model;
  model.weights = mode == OutputMode::kAveraged
                      ? Vector(sum / static_cast<double>(schedule.iterations))
                      : w;
  model.ambient_dim = k;
  model.provenance.confidence_margin = c;
  model.provenance.k = k;
  model.provenance.output_mode = mode;
  model.provenance.mu = mu;
  model.provenance.iterations = schedule.iterations;
  model.provenance.sigma = schedule.sigma;
  model.provenance.step_size = schedule.step_size;
  if (!model.weights.allFinite()) {
    throw Error("numeric_error", "noisy gradient descent produced non-finite weights");
  }
  return model;
}

// Projects and clips the data through phi, runs Ngd with reference norm 1 on
// the k-dimensional set and lifts the result back with phi^T.
inline LinearModel Jlgd(const JlMatrix& phi, double c, const Dataset& data,
                        double mu, OutputMode mode, std::uint64_t seed,
                        const NgdOptions& options = {}) {
  if (phi.d() != data.dim()) {
    throw DimensionError("projection expects dimension " +
                         std::to_string(phi.d()) + ", data has " +
                         std::to_string(data.dim()));
  }
  const Dataset projected = ProjectAndClip(phi, data, data.norm_bound());
  LinearModel inner =
      Ngd(LossSpec::Hinge(c), projected, mu, 1.0, mode, seed, options);
  LinearModel model;
  model.weights = Lift(phi, inner.weights);
  model.ambient_dim = data.dim();
  model.provenance = inner.provenance;
  model.provenance.jl_seed = phi.seed();
  model.provenance.k = phi.k();
  model.provenance.identity_projection = phi.is_identity();
  return model;
}

}  // namespace dpmargin

#endif  // DPMARGIN_OPTIMIZER_HPP_
