//
// Copyright 2026 The FeO2 Authors
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

#include "feo2/privacy.h"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "feo2/errors.h"
#include "test_oracles.h"

namespace feo2 {
namespace {

TEST(ClipTest, UnderThresholdUnchanged) {
  const auto res = Clip(ModelVector{3.0, 4.0}, 10.0);
  EXPECT_EQ(res.clipped, (ModelVector{3.0, 4.0}));
  EXPECT_TRUE(res.within_threshold);
}

TEST(ClipTest, OverThresholdScaled) {
  const auto res = Clip(ModelVector{3.0, 4.0}, 2.5);
  EXPECT_DOUBLE_EQ(res.clipped[0], 1.5);
  EXPECT_DOUBLE_EQ(res.clipped[1], 2.0);
  EXPECT_FALSE(res.within_threshold);
}

TEST(ClipTest, ZeroVector) {
  const auto res = Clip(ModelVector(3), 0.7);
  EXPECT_EQ(res.clipped, ModelVector(3));
  EXPECT_TRUE(res.within_threshold);
}

TEST(ClipTest, IdempotentAndDirectionPreserving) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    ModelVector v(5);
    for (double& x : v) x = normal(rng);
    const double s = std::abs(normal(rng)) + 0.01;
    const ModelVector once = Clip(v, s).clipped;
    EXPECT_EQ(Clip(once, s).clipped, once);
    EXPECT_LE(once.Norm(), v.Norm());
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * once[i];
    EXPECT_NEAR(dot / (v.Norm() * once.Norm()), 1.0, 1e-12);
  }
}

TEST(ClipTest, RejectsNonPositiveThreshold) {
  EXPECT_THROW(Clip(ModelVector{1.0}, 0.0), ConfigError);
}

TEST(GaussianNoiseTest, ZeroStddevIsExactlyZero) {
  Rng rng(1);
  EXPECT_EQ(GaussianNoiseVector(4, 0.0, rng), ModelVector(4));
}

TEST(GaussianNoiseTest, SampleMomentsMatch) {
  Rng rng(2);
  const ModelVector v = GaussianNoiseVector(100000, 1.0, rng);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(ss / (v.size() - 1)), 1.0, 0.02);
}

TEST(GaussianNoiseTest, SameStreamSameVector) {
  Rng a(5), b(5);
  EXPECT_EQ(GaussianNoiseVector(10, 0.3, a), GaussianNoiseVector(10, 0.3, b));
}

std::vector<bool> Bits(int ones, int total) {
  std::vector<bool> b(total, false);
  for (int i = 0; i < ones; ++i) b[i] = true;
  return b;
}

double Update(double s, int ones, int total, double kappa, double eta_b) {
  DpConfig cfg;
  cfg.z_b = 0.0;
  cfg.kappa = kappa;
  cfg.eta_b = eta_b;
  const auto bits = Bits(ones, total);
  auto flags = std::make_unique<bool[]>(total);
  std::copy(bits.begin(), bits.end(), flags.get());
  Rng rng(1);
  return UpdateClipNorm(s, std::span<const bool>(flags.get(), total), cfg, rng);
}

TEST(UpdateClipNormTest, HandComputedValues) {
  EXPECT_DOUBLE_EQ(Update(1.0, 1, 2, 0.5, 0.2), 1.0);
  EXPECT_NEAR(Update(1.0, 4, 4, 0.5, 0.2), 0.904837418035960, 1e-12);
  EXPECT_NEAR(Update(1.0, 0, 4, 1.0, 0.2), 1.221402758160170, 1e-12);
}

TEST(UpdateClipNormTest, MovesAgainstIndicatorExcess) {
  for (int ones = 0; ones <= 10; ++ones) {
    for (double kappa : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const double s = Update(2.0, ones, 10, kappa, 0.3);
      const double excess = ones / 10.0 - kappa;
      const double sign_log = std::log(s / 2.0);
      if (std::abs(excess) < 1e-12) {
        EXPECT_NEAR(sign_log, 0.0, 1e-15);
      } else {
        EXPECT_EQ(std::signbit(sign_log), !std::signbit(excess));
        EXPECT_GT(s, 0.0);
      }
    }
  }
}

TEST(DpConfigTest, ValidatesBounds) {
  DpConfig ok;
  EXPECT_NO_THROW(ok.Validate());
  DpConfig bad = ok;
  bad.kappa = 1.5;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.eta_b = 0.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = ok;
  bad.delta = 1.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
}

TEST(RdpTest, FullBatchIsGaussianClosedForm) {
  for (double z : {0.5, 1.0, 1.1, 3.0}) {
    for (int a = 2; a <= 64; ++a) {
      EXPECT_NEAR(SubsampledGaussianRdp(1.0, z, a), a / (2 * z * z), 1e-12);
    }
  }
}

TEST(RdpTest, ZeroSamplingIsFree) {
  EXPECT_EQ(SubsampledGaussianRdp(0.0, 1.0, 8.0), 0.0);
}

TEST(RdpTest, ZeroNoiseThrows) {
  EXPECT_THROW(SubsampledGaussianRdp(0.01, 0.0, 8.0), InfinitePrivacyLossError);
  PrivacyLedger ledger;
  EXPECT_THROW(ledger.Record(0.1, 0.0), InfinitePrivacyLossError);
}

TEST(RdpTest, IntegerOrderMatchesDirectSummation) {
  EXPECT_NEAR(SubsampledGaussianRdp(0.01, 1.1, 16.0),
              oracle::DirectSumRdp(0.01, 1.1, 16), 1e-9);
  for (double q : {0.001, 0.05, 0.3}) {
    for (double z : {0.8, 2.0}) {
      for (int a : {2, 5, 32}) {
        EXPECT_NEAR(SubsampledGaussianRdp(q, z, a),
                    oracle::DirectSumRdp(q, z, a), 1e-9)
            << q << " " << z << " " << a;
      }
    }
  }
}

TEST(RdpTest, FractionalOrderMatchesQuadrature) {
  for (double a : {1.25, 2.5, 7.75, 20.5, 63.5}) {
    EXPECT_NEAR(SubsampledGaussianRdp(0.01, 1.1, a),
                oracle::QuadratureRdp(0.01, 1.1, a), 1e-9)
        << a;
  }
}

TEST(PrivacyLedgerTest, RoundsAreAdditive) {
  PrivacyLedger one, two;
  one.Record(0.02, 1.3);
  two.Record(0.02, 1.3);
  two.Record(0.02, 1.3);
  ASSERT_EQ(one.rdp().size(), two.rdp().size());
  for (std::size_t i = 0; i < one.rdp().size(); ++i) {
    EXPECT_DOUBLE_EQ(two.rdp()[i], 2 * one.rdp()[i]);
    EXPECT_GE(one.rdp()[i], 0.0);
  }
  EXPECT_EQ(two.rounds_recorded(), 2);
  const PrivacyLedger three = AccountRound(two, 0.02, 1.3);
  EXPECT_EQ(three.rounds_recorded(), 3);
  EXPECT_EQ(two.rounds_recorded(), 2);
}

TEST(PrivacyLedgerTest, DefaultOrderGrid) {
  const auto orders = DefaultRdpOrders();
  EXPECT_EQ(orders.front(), 1.25);
  EXPECT_EQ(orders[orders.size() - 5], 63.5);
  EXPECT_EQ(orders.back(), 512.0);
  EXPECT_EQ(orders.size(), 250u + 4u);
}

TEST(PrivacyLedgerTest, EmptyLedgerIsNearZero) {
  PrivacyLedger ledger;
  const auto res = ledger.EpsilonAtDelta(1e-5);
  EXPECT_EQ(res.best_order, 512.0);
  EXPECT_NEAR(res.epsilon, std::log(1e5) / 511.0, 1e-15);
  EXPECT_THROW(PrivacyLedger(std::vector<double>{}).EpsilonAtDelta(1e-5),
               UsageError);
}

TEST(PrivacyLedgerTest, EpsilonMatchesIndependentConversion) {
  const double eps = EpsilonFor(1.1, 0.01, 100, 1e-5);
  EXPECT_NEAR(eps, oracle::OracleEpsilon(0.01, 1.1, 100, 1e-5), 1e-6);
}

TEST(PrivacyLedgerTest, MonotoneInNoiseAndRounds) {
  const double zs[] = {0.6, 0.9, 1.3, 2.0, 4.0};
  const int ts[] = {1, 10, 50, 200, 1000};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double e = EpsilonFor(zs[i], 0.05, ts[j], 1e-5);
      if (i + 1 < 5) EXPECT_GT(e, EpsilonFor(zs[i + 1], 0.05, ts[j], 1e-5));
      if (j + 1 < 5) EXPECT_LT(e, EpsilonFor(zs[i], 0.05, ts[j + 1], 1e-5));
    }
  }
  EXPECT_LT(EpsilonFor(2.0, 0.01, 100, 1e-5), EpsilonFor(1.0, 0.01, 100, 1e-5));
}

TEST(SolveNoiseMultiplierTest, RoundTrip) {
  for (double target : {0.6, 1.0, 3.6, 8.0}) {
    const double z = SolveNoiseMultiplier(target, 1e-4, 0.05, 200);
    EXPECT_LT(std::abs(EpsilonFor(z, 0.05, 200, 1e-4) - target), 1e-3);
  }
}

TEST(SolveNoiseMultiplierTest, HalvingTargetRaisesNoise) {
  const double z1 = SolveNoiseMultiplier(2.0, 1e-5, 0.01, 500);
  const double z2 = SolveNoiseMultiplier(1.0, 1e-5, 0.01, 500);
  EXPECT_GT(z2, z1);
}

TEST(SolveNoiseMultiplierTest, LooseTargetGivesLowerBracket) {
  EXPECT_DOUBLE_EQ(SolveNoiseMultiplier(1e6, 1e-5, 0.01, 10), 0.1);
}

TEST(SolveNoiseMultiplierTest, UnreachableTargetThrows) {
  EXPECT_THROW(SolveNoiseMultiplier(1e-6, 1e-5, 1.0, 1000), RangeError);
  EXPECT_THROW(SolveNoiseMultiplier(0.0, 1e-5, 0.1, 10), ConfigError);
}

}  // namespace
}  // namespace feo2
