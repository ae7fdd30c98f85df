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

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace dpmargin {
namespace {

NgdOptions Noiseless(std::uint64_t iterations) {
  NgdOptions o;
  o.overrides.iterations = iterations;
  o.overrides.sigma = 0.0;
  return o;
}

double AvgHinge(const Vector& w, const Dataset& s, double c) {
  return EmpiricalRisk(w, s, LossSpec::Hinge(c), RiskMode::kAveraged);
}

TEST(Ngd, NoiselessConvergesOnSeparableData) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticData synth = SynthMarginDataset(200, 5, 0.3, 0, seed);
    const LinearModel m = Ngd(LossSpec::Hinge(0.3), synth.data, 1.0, 1.0,
                              OutputMode::kAveraged, seed, Noiseless(500));
    EXPECT_LE(AvgHinge(m.weights, synth.data, 0.3), 0.01) << seed;
  }
}

TEST(Ngd, SingleStepIsNegativeScaledGradient) {
  const SyntheticData synth = SynthMarginDataset(20, 3, 0.2, 0, 1);
  // mu = 1/n gives T = ceil(1) = 1.
  NgdOptions o;
  o.overrides.sigma = 0.0;
  const double mu = 1.0 / 20;
  const LinearModel m =
      Ngd(LossSpec::Hinge(0.5), synth.data, mu, 1.0, OutputMode::kLastIterate, 3, o);
  ASSERT_EQ(m.provenance.iterations, 1u);
  const Vector g0 = SummedHingeGradient(Vector::Zero(3), synth.data, 0.5);
  const Vector expect = -m.provenance.step_size * g0;
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.weights[j], expect[j], 1e-15);
  const double delta = synth.data.norm_bound() / 0.5;
  EXPECT_DOUBLE_EQ(m.provenance.step_size, 1.0 / (20 * delta));
}

TEST(Ngd, DeterministicTrajectories) {
  const SyntheticData synth = SynthMarginDataset(100, 4, 0.2, 2, 2);
  const auto a = Ngd(LossSpec::Hinge(0.1), synth.data, 0.3, 1.0, OutputMode::kAveraged, 9);
  const auto b = Ngd(LossSpec::Hinge(0.1), synth.data, 0.3, 1.0, OutputMode::kAveraged, 9);
  const auto c = Ngd(LossSpec::Hinge(0.1), synth.data, 0.3, 1.0, OutputMode::kAveraged, 10);
  EXPECT_TRUE(a.weights == b.weights);
  EXPECT_FALSE(a.weights == c.weights);
}

TEST(Ngd, DefaultScheduleAndNoiseCalibration) {
  const SyntheticData synth = SynthMarginDataset(150, 4, 0.2, 0, 4);
  const double c = 0.1, mu = 0.2;
  NoiseAudit audit;
  const LinearModel m =
      Ngd(LossSpec::Hinge(c), synth.data, mu, 1.0, OutputMode::kAveraged, 1);
  const double n = 150, delta = synth.data.norm_bound() / c;
  const auto t = static_cast<std::uint64_t>(std::ceil(n * n * mu * mu));
  EXPECT_EQ(m.provenance.iterations, t);
  EXPECT_DOUBLE_EQ(m.provenance.sigma, delta * std::sqrt(static_cast<double>(t)) / mu);
  EXPECT_NEAR(m.provenance.sigma, n * delta, 1e-9 * n * delta);
  EXPECT_DOUBLE_EQ(m.provenance.step_size,
                   std::sqrt(1.0 / (t * (n * n * delta * delta +
                                         4 * m.provenance.sigma * m.provenance.sigma))));
  EXPECT_EQ(m.provenance.mu, mu);
  ASSERT_EQ(audit.injected().size(), 1u);
  EXPECT_EQ(audit.injected()[0].sigma, m.provenance.sigma);
  EXPECT_TRUE(audit.InjectedMatchesCalibrated());
}

TEST(Ngd, OverriddenTStillCalibrates) {
  const SyntheticData synth = SynthMarginDataset(50, 3, 0.2, 0, 4);
  NgdOptions o;
  o.overrides.iterations = 37;
  NoiseAudit audit;
  const LinearModel m =
      Ngd(LossSpec::Hinge(0.2), synth.data, 0.4, 1.0, OutputMode::kLastIterate, 1, o);
  const double delta = synth.data.norm_bound() / 0.2;
  EXPECT_DOUBLE_EQ(m.provenance.sigma, delta * std::sqrt(37.0) / 0.4);
  EXPECT_TRUE(audit.InjectedMatchesCalibrated());
  const double expect_step = std::sqrt(
      1.0 / (37 * (50.0 * 50 * delta * delta +
                   3 * m.provenance.sigma * m.provenance.sigma * std::log(100.0))));
  EXPECT_DOUBLE_EQ(m.provenance.step_size, expect_step);
}

TEST(Ngd, IterationCap) {
  const SyntheticData synth = SynthMarginDataset(100, 3, 0.2, 0, 4);
  NgdOptions o;
  o.iteration_cap = 1000;
  EXPECT_THROW(Ngd(LossSpec::Hinge(0.1), synth.data, 1.0, 1.0, OutputMode::kAveraged, 1, o),
               ResourceError);
  EXPECT_THROW(Ngd(LossSpec::ZeroOne(), synth.data, 1.0, 1.0, OutputMode::kAveraged, 1),
               DomainError);
  EXPECT_THROW(Ngd(LossSpec::Hinge(0.1), synth.data, 0.0, 1.0, OutputMode::kAveraged, 1),
               PreconditionError);
}

TEST(Ngd, NoiselessRiskFallsWithT) {
  std::vector<double> means;
  for (std::uint64_t t : {25u, 50u, 100u, 200u, 400u, 800u}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SyntheticData synth = SynthMarginDataset(200, 20, 0.2, 2, seed);
      const LinearModel m = Ngd(LossSpec::Hinge(0.2), synth.data, 1.0, 1.0,
                                OutputMode::kAveraged, seed, Noiseless(t));
      total += AvgHinge(m.weights, synth.data, 0.2);
    }
    means.push_back(total / 5);
  }
  for (std::size_t i = 1; i < means.size(); ++i) EXPECT_LT(means[i], means[i - 1]) << i;
}

// Averaged hinge at c = gamma / 3 against b^2/(n gamma^2 mu) + b m/(n gamma)
// with the polylog factor set to 1 and the test constant pinned at 2.
TEST(Ngd, InlierOutlierBound) {
  constexpr double kEmpiricalConstant = 2.0;
  const std::size_t n = 1000;
  const double gamma = 0.3;
  for (std::size_t m : {0u, 20u, 40u}) {
    for (double mu : {0.05, 0.1}) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const SyntheticData synth = SynthMarginDataset(n, 10, gamma, m, seed);
        const LinearModel model = Jlgd(JlMatrix::Identity(10), gamma / 3, synth.data,
                                       mu, OutputMode::kAveraged, seed);
        const double b = synth.data.norm_bound();
        const double bound = b * b / (n * gamma * gamma * mu) + b * m / (n * gamma);
        EXPECT_LE(AvgHinge(model.weights, synth.data, gamma / 3),
                  kEmpiricalConstant * bound)
            << m << " " << mu << " " << seed;
      }
    }
  }
}

TEST(Jlgd, LiftedClassificationAgreesWithProjected) {
  const SyntheticData synth = SynthMarginDataset(80, 30, 0.3, 3, 6);
  const JlMatrix phi = SampleJl(12, 30, 4);
  const Dataset projected = ProjectAndClip(phi, synth.data, synth.data.norm_bound());
  const LinearModel lifted =
      Jlgd(phi, 0.1, synth.data, 0.5, OutputMode::kAveraged, 8);
  const LinearModel inner = Ngd(LossSpec::Hinge(0.1), projected, 0.5, 1.0,
                                OutputMode::kAveraged, 8);
  EXPECT_EQ(lifted.ambient_dim, 30);
  EXPECT_EQ(lifted.provenance.jl_seed, std::optional<std::uint64_t>(4));
  EXPECT_EQ(lifted.provenance.confidence_margin, 0.1);
  EXPECT_EQ(lifted.provenance.mu, 0.5);
  for (std::size_t i = 0; i < synth.data.size(); ++i) {
    const LabeledPoint p = synth.data.point(i);
    const LabeledPoint q = projected.point(i);
    const double raw = lifted.weights.dot(p.features);
    const double proj = inner.weights.dot(q.features);
    if ((phi.Apply(p.features) - q.features).norm() == 0.0 && std::abs(proj) > 1e-9) {
      EXPECT_EQ(ZeroOneLoss(lifted.weights, p), ZeroOneLoss(inner.weights, q)) << i;
      EXPECT_NEAR(raw, proj, 1e-10);
    }
  }
}

TEST(Jlgd, NoiselessWideMarginIsPerfect) {
  const double c = 0.1;
  const SyntheticData synth = SynthMarginDataset(300, 8, 3 * c, 0, 11);
  NgdOptions o;
  o.overrides.sigma = 0.0;
  const LinearModel m =
      Jlgd(JlMatrix::Identity(8), c, synth.data, 0.1, OutputMode::kAveraged, 1, o);
  EXPECT_EQ(EmpiricalRisk(m.weights, synth.data, LossSpec::ZeroOne(), RiskMode::kAveraged), 0.0);
}

TEST(Jlgd, DimensionMismatch) {
  const SyntheticData synth = SynthMarginDataset(20, 4, 0.3, 0, 1);
  EXPECT_THROW(Jlgd(SampleJl(3, 5, 1), 0.1, synth.data, 0.5, OutputMode::kAveraged, 1),
               DimensionError);
}

}  // namespace
}  // namespace dpmargin
