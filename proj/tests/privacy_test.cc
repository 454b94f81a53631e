// Copyright 2026 The SEDML Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "sedml/privacy.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "sedml/errors.h"
#include "sedml/rng.h"

namespace sedml {
namespace {

// Independent reference for the RDP-to-DP conversion: a dense scan of
// alpha over (1, 512] of eps(alpha) + ln(1/delta) / (alpha - 1).
double DenseScanEpsilon(double per_alpha, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (double a = 1.001; a <= 512.0; a *= 1.0005) {
    best = std::min(best, per_alpha * a + std::log(1.0 / delta) / (a - 1.0));
  }
  return best;
}

TEST(GaussTest, ZeroSigmaAndDeterminism) {
  for (uint64_t s = 0; s < 100; ++s) EXPECT_EQ(GaussSample(0.0, s, {s, 2, 0}), 0.0);
  EXPECT_EQ(GaussSample(3.0, 9, {1, 3, 4}), GaussSample(3.0, 9, {1, 3, 4}));
  EXPECT_NE(GaussSample(3.0, 9, {1, 3, 4}), GaussSample(3.0, 9, {1, 3, 5}));
  EXPECT_THROW(GaussSample(-1.0, 0, {}), UsageError);
}

TEST(GaussTest, Moments) {
  constexpr int kDraws = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = GaussSample(1.0, 1234, {static_cast<uint64_t>(i), 2, 0});
    sum += x;
    sq += x * x;
  }
  const double mean = sum / kDraws;
  const double sd = std::sqrt(sq / kDraws - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_GE(sd, 0.99);
  EXPECT_LE(sd, 1.01);
}

TEST(FixedPointTest, Examples) {
  const Ring r(64);
  EXPECT_EQ(FixedPointEncode(0.0, 10'000'000, r).value(), 0u);
  EXPECT_EQ(FixedPointEncode(3.14159265, 10'000'000, r).signed_value(), 31415926);
  const RingElement neg = FixedPointEncode(-1.5, 10, r);
  EXPECT_EQ(neg.signed_value(), -15);
  EXPECT_DOUBLE_EQ(FixedPointDecode(neg, 10), -1.5);
  // Floor, not truncation toward zero.
  EXPECT_EQ(FixedPointEncodeInt(-0.01, 10), -1);
  EXPECT_EQ(FixedPointEncodeInt(0.01, 10), 0);
}

TEST(FixedPointTest, OutOfRange) {
  EXPECT_THROW(FixedPointEncode(300.0, 1, Ring(8)), RangeError);
  EXPECT_THROW(FixedPointEncode(-129.0, 1, Ring(8)), RangeError);
  EXPECT_EQ(FixedPointEncode(-128.0, 1, Ring(8)).signed_value(), -128);
  EXPECT_THROW(FixedPointEncode(1e30, 10'000'000, Ring(64)), RangeError);
}

TEST(FixedPointTest, EncodingIsMonotone) {
  Rng rng(8);
  const Ring r(64);
  for (int i = 0; i < 10000; ++i) {
    double x = (rng.Uniform() - 0.5) * 1000, y = (rng.Uniform() - 0.5) * 1000;
    if (x > y) std::swap(x, y);
    ASSERT_LE(FixedPointEncode(x, 10'000'000, r).signed_value(),
              FixedPointEncode(y, 10'000'000, r).signed_value());
  }
}

TEST(RdpTest, CurveExamples) {
  const RdpCurve c = RdpOfProtocol(3.0, std::sqrt(2.0));
  EXPECT_NEAR(c(2.0), 2.0, 1e-12);
  EXPECT_NEAR(c(4.0), 2.0 * c(2.0), 1e-12);
  EXPECT_NEAR(RdpOfProtocol(6.0, 2.0 * std::sqrt(2.0))(2.0), c(2.0) / 4.0, 1e-12);
  EXPECT_TRUE(RdpOfProtocol(0.0, 1.0).IsInfinite());
  EXPECT_THROW(RdpOfProtocol(-1.0, 1.0), UsageError);
}

TEST(RdpTest, Composition) {
  const RdpCurve a = RdpOfProtocol(2.0, 3.0), b = RdpOfProtocol(5.0, 1.0);
  EXPECT_EQ(Compose(std::vector<RdpCurve>{a}), a);
  const std::vector<RdpCurve> ab{a, b}, ba{b, a};
  EXPECT_EQ(Compose(ab), Compose(ba));
  const RdpCurve q = ComposeRepeated(a, 1000);
  for (double alpha : {1.5, 2.0, 32.0}) EXPECT_NEAR(q(alpha), 1000 * a(alpha), 1e-9 * q(alpha));
  EXPECT_THROW(Compose(std::vector<RdpCurve>{}), UsageError);
}

TEST(RdpToDpTest, ConstantCurve) {
  const DpGuarantee g = RdpToDp(RdpCurve{0.0, 1.0}, std::exp(-1.0));
  EXPECT_LE(g.epsilon, 2.0);
  EXPECT_NEAR(g.epsilon, 1.0 + 1.0 / 511.0, 1e-9);  // best at the largest order
  EXPECT_THROW(RdpToDp(RdpCurve{1.0, 0.0}, 0.0), UsageError);
  EXPECT_THROW(RdpToDp(RdpCurve{1.0, 0.0}, 1.0), UsageError);
}

TEST(RdpToDpTest, ClosedFormFixedPoint) {
  EXPECT_NEAR(ClosedFormEpsilon(3.0, std::sqrt(2.0), std::exp(-1.0)), 3.0, 1e-12);
  EXPECT_NEAR(RdpToDp(RdpOfProtocol(3.0, std::sqrt(2.0)), std::exp(-1.0)).epsilon, 3.0, 1e-9);
}

TEST(RdpToDpTest, MonotoneInDelta) {
  const RdpCurve c = RdpOfProtocol(4.0, 4.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {1e-9, 1e-6, 1e-3, 0.1, 0.5}) {
    const double e = RdpToDp(c, d).epsilon;
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(RdpToDpTest, GridMatchesClosedFormAndDenseScan) {
  for (double s1 : {1.0, 2.0, 4.0, 8.0}) {
    for (double s2 : {1.0, 2.0, 4.0, 8.0}) {
      for (double delta : {1e-5, 1e-6}) {
        const double grid = EvaluateProtocol(s1, s2, delta, 1).epsilon;
        const double closed = ClosedFormEpsilon(s1, s2, delta);
        EXPECT_LE(std::abs(grid - closed), 0.01 * closed) << s1 << " " << s2 << " " << delta;
        const double dense = DenseScanEpsilon(RdpOfProtocol(s1, s2).per_alpha, delta);
        EXPECT_LE(grid, dense + 1e-9);
        EXPECT_GE(grid, closed - 1e-9);  // the unconstrained optimum is a lower bound
      }
    }
  }
}

TEST(RdpToDpTest, AlphaGridStaysInRange) {
  for (double a : AlphaGrid()) {
    EXPECT_GT(a, 1.0);
    EXPECT_LE(a, 512.0);
  }
}

TEST(SolveTest, HandPoint) {
  const NoiseSolution s = SolveNoiseForEpsilon(3.0, std::exp(-1.0), 3.0 / std::sqrt(2.0), 1);
  EXPECT_NEAR(s.sigma1 * s.sigma1, 9.0, 1e-3);
  EXPECT_NEAR(s.sigma2 * s.sigma2, 2.0, 1e-3);
}

TEST(SolveTest, RoundTripRandomTargets) {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const double target = 0.5 + 20.0 * rng.Uniform();
    const double ratio = 0.25 + 4.0 * rng.Uniform();
    const double delta = std::pow(10.0, -3.0 - 5.0 * rng.Uniform());
    const uint64_t queries = 1 + rng.Below(2000);
    const NoiseSolution s = SolveNoiseForEpsilon(target, delta, ratio, queries);
    EXPECT_LT(std::abs(EvaluateProtocol(s.sigma1, s.sigma2, delta, queries).epsilon - target),
              1e-4)
        << target;
    EXPECT_NEAR(s.sigma1 / s.sigma2, ratio, 1e-9 * ratio);
  }
}

TEST(SolveTest, HugeTargetAndInfeasible) {
  const NoiseSolution s = SolveNoiseForEpsilon(1e6, 1e-5, 1.0, 1);
  EXPECT_LT(s.sigma2, 0.1);
  EXPECT_LT(std::abs(s.achieved.epsilon - 1e6), 1e-4);
  EXPECT_THROW(SolveNoiseForEpsilon(1e-4, 1e-5, 1.0, 10), InfeasibleError);
  EXPECT_THROW(SolveNoiseForEpsilon(-1.0, 1e-5, 1.0, 10), UsageError);
  EXPECT_THROW(SolveNoiseForEpsilon(1.0, 1e-5, 0.0, 10), UsageError);
}

}  // namespace
}  // namespace sedml
