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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sedml/errors.h"
#include "sedml/rng.h"

namespace sedml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxAlpha = 512.0;

// Uniform in (0, 1], never 0 so the logarithm below is finite.
double OpenUniform(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double DpObjective(const RdpCurve& c, double log_inv_delta, double alpha) {
  return c(alpha) + log_inv_delta / (alpha - 1.0);
}

}  // namespace

double GaussSample(double sigma, uint64_t seed, const NoiseIndex& index) {
  if (!(sigma >= 0.0)) throw UsageError("sigma must be non-negative");
  if (sigma == 0.0) return 0.0;
  const uint64_t base = DeriveSeed(seed, {0x6e6f697365ULL, index.sample,
                                          index.phase, index.cls});
  const double u1 = OpenUniform(Mix64(base ^ 1));
  const double u2 = OpenUniform(Mix64(base ^ 2));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return sigma * radius * std::cos(2.0 * std::numbers::pi * u2);
}

int64_t FixedPointEncodeInt(double x, uint64_t scale) {
  if (scale == 0) throw UsageError("scale must be at least 1");
  const double v = std::floor(x * static_cast<double>(scale));
  if (!std::isfinite(v) || v >= 0x1.0p63 || v < -0x1.0p63) {
    throw RangeError("fixed-point value out of range");
  }
  return static_cast<int64_t>(v);
}

RingElement FixedPointEncode(double x, uint64_t scale, Ring ring) {
  const double v = std::floor(x * static_cast<double>(scale));
  const double bound = std::ldexp(1.0, static_cast<int>(ring.bits()) - 1);
  if (scale == 0) throw UsageError("scale must be at least 1");
  if (!std::isfinite(v) || v >= bound || v < -bound) {
    throw RangeError("fixed-point value " + std::to_string(v) +
                     " does not fit a signed " + std::to_string(ring.bits()) +
                     "-bit ring");
  }
  return RingElement::FromSigned(static_cast<int64_t>(v), ring);
}

double FixedPointDecode(const RingElement& v, uint64_t scale) {
  return static_cast<double>(v.signed_value()) / static_cast<double>(scale);
}

double RdpCurve::operator()(double alpha) const {
  if (IsInfinite()) return kInf;
  return per_alpha * alpha + constant;
}

bool RdpCurve::IsInfinite() const {
  return std::isinf(per_alpha) || std::isinf(constant);
}

RdpCurve RdpOfProtocol(double sigma1, double sigma2) {
  if (sigma1 < 0.0 || sigma2 < 0.0) throw UsageError("sigma must be non-negative");
  if (sigma1 == 0.0 || sigma2 == 0.0) return RdpCurve{kInf, 0.0};
  return RdpCurve{9.0 / (2.0 * sigma1 * sigma1) + 1.0 / (sigma2 * sigma2), 0.0};
}

RdpCurve Compose(std::span<const RdpCurve> curves) {
  if (curves.empty()) throw UsageError("nothing to compose");
  RdpCurve total;
  for (const RdpCurve& c : curves) {
    total.per_alpha += c.per_alpha;
    total.constant += c.constant;
  }
  return total;
}

RdpCurve ComposeRepeated(const RdpCurve& curve, uint64_t times) {
  const double q = static_cast<double>(times);
  if (times == 0) return RdpCurve{};
  return RdpCurve{curve.per_alpha * q, curve.constant * q};
}

const std::vector<double>& AlphaGrid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int k = 1; k <= 72; ++k) g.push_back(1.0 + k / 8.0);
    for (double a : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) g.push_back(a);
    // Geometric fill so no optimum is more than a few percent from a point.
    for (double b = 1.0 / 64; 1.0 + b <= kMaxAlpha; b *= 1.1) g.push_back(1.0 + b);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }();
  return grid;
}

DpGuarantee RdpToDp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  const double lid = std::log(1.0 / delta);
  DpGuarantee out{kInf, delta, 0.0};
  if (curve.IsInfinite()) return out;

  const auto& grid = AlphaGrid();
  size_t best = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (DpObjective(curve, lid, grid[i]) < DpObjective(curve, lid, grid[best])) {
      best = i;
    }
  }
  // The objective is convex in alpha, so the optimum lies between the best
  // grid point's neighbours.
  double lo = best == 0 ? 1.0 + 1e-9 : grid[best - 1];
  double hi = best + 1 == grid.size() ? kMaxAlpha : grid[best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = DpObjective(curve, lid, x1);
  double f2 = DpObjective(curve, lid, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = DpObjective(curve, lid, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = DpObjective(curve, lid, x2);
    }
  }
  double alpha = f1 < f2 ? x1 : x2;
  double eps = std::min(f1, f2);
  if (DpObjective(curve, lid, grid[best]) <= eps) {
    alpha = grid[best];
    eps = DpObjective(curve, lid, alpha);
  }
  out.epsilon = eps;
  out.alpha_star = alpha;
  return out;
}

double ClosedFormEpsilon(double sigma1, double sigma2, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (sigma1 <= 0.0 || sigma2 <= 0.0) return kInf;
  const double s1 = sigma1 * sigma1;
  const double s2 = sigma2 * sigma2;
  return std::sqrt(2.0 * (9.0 / s1 + 2.0 / s2) * std::log(1.0 / delta)) +
         (9.0 / (2.0 * s1) + 1.0 / s2);
}

DpGuarantee EvaluateProtocol(double sigma1, double sigma2, double delta,
                             uint64_t queries) {
  if (queries == 0) return DpGuarantee{0.0, delta, 0.0};
  return RdpToDp(ComposeRepeated(RdpOfProtocol(sigma1, sigma2), queries), delta);
}

NoiseSolution SolveNoiseForEpsilon(double target_epsilon, double delta,
                                   double ratio, uint64_t queries) {
  if (!(target_epsilon > 0.0)) throw UsageError("target epsilon must be positive");
  if (!(ratio > 0.0)) throw UsageError("sigma ratio must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (queries == 0) throw UsageError("need at least one query");

  // Epsilon is continuous and strictly decreasing in sigma2; bisect on
  // log(sigma2). Large sigmas approach the floor ln(1/delta) / (512 - 1).
  auto eps_at = [&](double log_s2) {
    const double s2 = std::exp(log_s2);
    return EvaluateProtocol(ratio * s2, s2, delta, queries).epsilon;
  };
  double lo = -40.0, hi = 40.0;
  if (eps_at(hi) > target_epsilon) {
    throw InfeasibleError("epsilon " + std::to_string(target_epsilon) +
                          " is below what " + std::to_string(queries) +
                          " queries can reach at delta " + std::to_string(delta));
  }
  if (eps_at(lo) < target_epsilon) {
    throw InfeasibleError("epsilon target too large to resolve");
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eps_at(mid) > target_epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) break;
  }
  NoiseSolution sol;
  sol.sigma2 = std::exp(hi);
  sol.sigma1 = ratio * sol.sigma2;
  sol.achieved = EvaluateProtocol(sol.sigma1, sol.sigma2, delta, queries);
  if (std::abs(sol.achieved.epsilon - target_epsilon) >= 1e-4) {
    throw InfeasibleError("could not match epsilon " + std::to_string(target_epsilon));
  }
  return sol;
}

}  // namespace sedml
