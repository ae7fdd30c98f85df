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

TEST(ProjectionDim, Examples) {
  // ceil(200 * ln(8,242,400)) with a 50-digit log.
  EXPECT_EQ(ProjectionDim(0.2, 100, 8, 0.01, 1.0), 3185u);
  EXPECT_EQ(ProjectionDim(1.0, 100, 8, 0.01, 1.0),
            static_cast<std::uint64_t>(std::ceil(8 * std::log(8.0 * 102 * 101 / 0.01))));
  EXPECT_EQ(ProjectionDim(1.0, 100, 8, 0.01, 1.0), 128u);
  EXPECT_EQ(ProjectionDim(0.3, 100, 8, 0.1, 1.0), 1211u);
}

TEST(ProjectionDim, DoublingGammaQuartersTheFactor) {
  const double log_term = std::log(5.0 * 52 * 51 / 0.05);
  for (double gamma : {0.05, 0.1, 0.2}) {
    const double raw = 8 * log_term / (gamma * gamma);
    EXPECT_EQ(ProjectionDim(gamma, 50, 5, 0.05, 1.0),
              static_cast<std::uint64_t>(std::ceil(raw)));
    EXPECT_EQ(ProjectionDim(2 * gamma, 50, 5, 0.05, 1.0),
              static_cast<std::uint64_t>(std::ceil(raw / 4)));
  }
}

TEST(ProjectionDim, Errors) {
  EXPECT_THROW(ProjectionDim(0.0, 10, 1, 0.1, 1.0), DomainError);
  EXPECT_THROW(ProjectionDim(-1.0, 10, 1, 0.1, 1.0), DomainError);
  EXPECT_THROW(ProjectionDim(0.5, 10, 1, 1.0, 1.0), DomainError);
}

TEST(Jl, DeterministicAndSigned) {
  const JlMatrix a = SampleJl(40, 30, 5), b = SampleJl(40, 30, 5), c = SampleJl(40, 30, 6);
  int differ = 0;
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 30; ++j) {
      EXPECT_EQ(a.entry(i, j), b.entry(i, j));
      EXPECT_EQ(std::abs(a.entry(i, j)), 1 / std::sqrt(40.0));
      differ += a.entry(i, j) != c.entry(i, j);
    }
  }
  EXPECT_GT(differ, 0);
}

TEST(Jl, SignsBalancedAndColumnsUnitNorm) {
  const Eigen::Index k = 250, d = 400;
  const JlMatrix phi = SampleJl(k, d, 77);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) sum += phi.entry(i, j) > 0 ? 1 : -1;
  }
  const double m = static_cast<double>(k * d);
  EXPECT_LE(std::abs(sum / m), 3 / std::sqrt(m));
  for (Eigen::Index i = 0; i < k; i += 37) {
    EXPECT_NEAR(phi.Row(i).squaredNorm(), static_cast<double>(d) / k, 1e-12);
  }
}

TEST(Jl, LazyMatchesMaterialized) {
  const JlMatrix dense = JlMatrix::Sample(20, 15, 3);
  const JlMatrix lazy = JlMatrix::Sample(20, 15, 3, 0);
  ASSERT_TRUE(dense.materialized());
  ASSERT_FALSE(lazy.materialized());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Vector x(15), w(20);
  for (auto& v : x) v = g(rng);
  for (auto& v : w) v = g(rng);
  // Same entries; only the summation order may differ.
  EXPECT_LE((dense.Apply(x) - lazy.Apply(x)).norm(), 1e-12 * x.norm());
  EXPECT_LE((dense.ApplyTranspose(w) - lazy.ApplyTranspose(w)).norm(), 1e-12 * w.norm());
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 15; ++j) EXPECT_EQ(dense.entry(i, j), lazy.entry(i, j));
  }
}

TEST(Jl, AdjointIdentity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const JlMatrix phi = SampleJl(1 + trial % 9, 2 + trial % 13, trial);
    Vector x(phi.d()), w(phi.k());
    for (auto& v : x) v = g(rng);
    for (auto& v : w) v = g(rng);
    const double lhs = w.dot(phi.Apply(x));
    const double rhs = Lift(phi, w).dot(x);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)) * phi.d());
  }
}

TEST(Lift, MatchesHandTranspose) {
  const JlMatrix phi = SampleJl(3, 5, 8);
  Vector w(3);
  w << 0.5, -1.25, 2.0;
  const Vector lifted = Lift(phi, w);
  for (Eigen::Index j = 0; j < 5; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 3; ++i) acc += phi.entry(i, j) * w[i];
    EXPECT_NEAR(lifted[j], acc, 1e-15);
  }
  EXPECT_TRUE(Lift(phi, Vector::Zero(3)).isZero());
}

TEST(ProjectAndClip, Examples) {
  const Dataset s = testing::Make({{{0.1, 0.2}, 1}, {{3, 0}, -1}});
  const Dataset out = ProjectAndClip(JlMatrix::Identity(2), s, 1.0);
  EXPECT_EQ(out.features()(0, 0), 0.1);
  EXPECT_EQ(out.features()(0, 1), 0.2);
  EXPECT_NEAR(out.features().row(1).norm(), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(out.norm_bound(), 2.0);
  EXPECT_EQ(out.labels(), s.labels());
}

TEST(ProjectAndClip, NormDistortionHolds) {
  // e = gamma / b with b = 1; every point must keep its squared norm within
  // a factor 1 +- e/3 in at least a 1 - beta fraction of draws. A constant
  // of 8 is too small for this statement (about half the draws fail here);
  // the Rademacher tail exp(-k (e/3)^2 / 4) asks for roughly 36.
  constexpr double kDistortionJlConstant = 36.0;
  const double gamma = 0.5, beta = 0.1;
  const SyntheticData synth = SynthMarginDataset(30, 50, gamma, 0, 12);
  const auto k = static_cast<Eigen::Index>(
      ProjectionDim(gamma, 30, 1, beta, 1.0, kDistortionJlConstant));
  const double e = gamma;
  int good = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    const JlMatrix phi = SampleJl(k, 50, 500 + t);
    bool ok = true;
    for (std::size_t i = 0; i < synth.data.size(); ++i) {
      const Vector x = synth.data.point(i).features;
      const double ratio = phi.Apply(x).squaredNorm() / x.squaredNorm();
      ok = ok && ratio >= 1 - e / 3 && ratio <= 1 + e / 3;
    }
    good += ok;
  }
  const double slack = 3 * std::sqrt(beta * (1 - beta) / trials);
  EXPECT_GE(static_cast<double>(good) / trials, 1 - beta - slack);
}

}  // namespace
}  // namespace dpmargin
