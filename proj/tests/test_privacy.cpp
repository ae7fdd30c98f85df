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

#include <algorithm>

#include "test_util.hpp"

namespace dpmargin {
namespace {

TEST(Compose, Examples) {
  const std::vector<double> one{0.7};
  EXPECT_EQ(ComposeGdp(one), 0.7);
  const std::vector<double> pair{0.3, 0.4};
  EXPECT_NEAR(ComposeGdp(pair), 0.5, 1e-15);
  for (int m : {2, 7, 64, 1000}) {
    const std::vector<double> copies(m, 0.9 / std::sqrt(static_cast<double>(m)));
    EXPECT_NEAR(ComposeGdp(copies), 0.9, 1e-12) << m;
  }
  EXPECT_THROW(ComposeGdp(std::vector<double>{}), PreconditionError);
  EXPECT_THROW(ComposeGdp(std::vector<double>{0.1, -0.1}), PreconditionError);
}

TEST(Compose, PermutationInvariantAndAssociative) {
  std::vector<double> mus{0.11, 0.5, 0.02, 1.3, 0.7, 0.25};
  const double base = ComposeGdp(mus);
  std::sort(mus.begin(), mus.end());
  do {
    EXPECT_NEAR(ComposeGdp(mus), base, 1e-14);
  } while (std::next_permutation(mus.begin(), mus.end()));
  const std::vector<double> left(mus.begin(), mus.begin() + 2);
  const std::vector<double> right(mus.begin() + 2, mus.end());
  const std::vector<double> nested{ComposeGdp(left), ComposeGdp(right)};
  EXPECT_NEAR(ComposeGdp(nested), base, 1e-14);
}

TEST(Conversion, Examples) {
  EXPECT_NEAR(GdpToApproxDp(1, 1e-5), 0.5 + std::sqrt(2 * std::log(1e5)), 1e-12);
  EXPECT_NEAR(GdpToApproxDp(1, 1e-5), 5.298525912188081, 1e-12);
  EXPECT_NEAR(GdpToApproxDp(1, std::exp(-0.5)), 1.5, 1e-12);
  EXPECT_NEAR(GdpToApproxDpHighPrivacy(0.1, 1e-5), 0.9597051824376162, 1e-12);
  const double boundary = 2 * std::sqrt(2 * std::log(1e5));
  EXPECT_NO_THROW(GdpToApproxDpHighPrivacy(boundary, 1e-5));
  EXPECT_THROW(GdpToApproxDpHighPrivacy(boundary * 1.001, 1e-5), PreconditionError);
  EXPECT_THROW(GdpToApproxDp(1, 0), PreconditionError);
  EXPECT_THROW(GdpToApproxDp(1, 1), PreconditionError);
  EXPECT_THROW(GdpToApproxDp(0, 0.1), PreconditionError);
}

TEST(Conversion, MonotoneOnGrid) {
  const std::vector<double> mus{0.01, 0.05, 0.1, 0.5, 1, 2};
  const std::vector<double> deltas{1e-9, 1e-7, 1e-5, 1e-3, 1e-1};
  for (std::size_t i = 0; i < mus.size(); ++i) {
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const double mu = mus[i], delta = deltas[j];
      if (i + 1 < mus.size()) {
        EXPECT_LT(GdpToApproxDp(mu, delta), GdpToApproxDp(mus[i + 1], delta));
        EXPECT_LT(GdpToApproxDpHighPrivacy(mu, delta),
                  GdpToApproxDpHighPrivacy(mus[i + 1], delta));
        EXPECT_LT(TnbTunePrivacy(mu, 1e-3, delta), TnbTunePrivacy(mus[i + 1], 1e-3, delta));
      }
      if (j + 1 < deltas.size()) {
        EXPECT_GT(GdpToApproxDp(mu, delta), GdpToApproxDp(mu, deltas[j + 1]));
        EXPECT_GT(GdpToApproxDpHighPrivacy(mu, delta),
                  GdpToApproxDpHighPrivacy(mu, deltas[j + 1]));
      }
    }
  }
}

TEST(MasterBudget, Iterate) {
  EXPECT_NEAR(MasterIterBudget(1, 1e-5), 0.10419866624665258, 1e-15);
  for (double eps : {0.01, 0.5, 1.0, 2.0, 10.0}) {
    const double mu = MasterIterBudget(eps, 1e-6);
    EXPECT_NEAR(GdpToApproxDpHighPrivacy(mu, 1e-6), eps, 1e-12 * eps);
  }
  EXPECT_NO_THROW(MasterIterBudget(8 * std::log(1e5), 1e-5));
  EXPECT_THROW(MasterIterBudget(8 * std::log(1e5) * 1.0001, 1e-5), PreconditionError);
  EXPECT_THROW(MasterIterBudget(0, 1e-5), PreconditionError);
}

TEST(MasterBudget, CandidateSplit) {
  const CandidateBudget one = PerCandidateBudget(0.8, 1);
  EXPECT_NEAR(one.base_mu, 0.8 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(PerCandidateBudget(0.104, 8).base_mu, 0.026, 1e-12);
  EXPECT_NEAR(PerCandidateBudget(MasterIterBudget(1, 1e-5), 8).base_mu,
              0.026049666561663145, 1e-15);
  // The 2|grid| pieces (runs and scores) compose back to mu.
  for (std::size_t grid : {1u, 3u, 8u, 13u}) {
    const double mu = 0.37;
    const CandidateBudget b = PerCandidateBudget(mu, grid, 2.5);
    const double score_mu = 2.5 / b.score_sigma;
    std::vector<double> pieces;
    for (std::size_t i = 0; i < grid; ++i) {
      pieces.push_back(b.base_mu);
      pieces.push_back(score_mu);
    }
    EXPECT_NEAR(ComposeGdp(pieces), mu, 1e-12);
  }
}

TEST(MasterBudget, Tnb) {
  EXPECT_NEAR(TnbTunePrivacy(0.05, 1e-4, 1e-5), 0.9694447118302063, 1e-12);
  EXPECT_NEAR(TnbTunePrivacy(1e-12, 1e-4, 1e-5), 1e-5, 1e-9);
  const TnbBudget b = MasterTnbBudget(1.0, 1e-5, 8, 100);
  EXPECT_NEAR(1 / b.r, 79992.0, 1e-6);
  EXPECT_NEAR(TnbTunePrivacySimplified(b.mu, b.r, 1e-5), 1.0 + 1e-5, 1e-12);
  EXPECT_LE(TnbTunePrivacy(b.mu, b.r, 1e-5), 1.0 + 1e-5);
  EXPECT_THROW(MasterTnbBudget(1e-5, 1e-5, 8, 100), PreconditionError);
}

TEST(NoiseAudit, ScaleFromFormula) {
  NoiseAudit audit;
  const double sigma = NgdNoiseScale(2.0, 400, 0.5);
  EXPECT_DOUBLE_EQ(sigma, 2.0 * 20 / 0.5);
  ASSERT_EQ(audit.calibrated().size(), 1u);
  EXPECT_EQ(audit.calibrated()[0].site, NoiseSite::kOptimizer);
  EXPECT_THROW(NoiseAudit(), Error);
}

TEST(NoiseAudit, DetectsUncalibratedInjection) {
  NoiseAudit audit;
  NoiseAudit::RecordCalibrated(NoiseSite::kIterScore, 1.0);
  NoiseAudit::RecordInjected(NoiseSite::kIterScore, 1.0);
  EXPECT_TRUE(audit.InjectedMatchesCalibrated());
  NoiseAudit::RecordInjected(NoiseSite::kOptimizer, 1.0);
  EXPECT_FALSE(audit.InjectedMatchesCalibrated());
}

}  // namespace
}  // namespace dpmargin
