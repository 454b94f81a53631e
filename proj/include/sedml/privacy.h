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

// Gaussian noise, fixed-point encoding, and the Renyi-DP accountant for the
// threshold check (sparse vector) plus noisy argmax (report-noisy-max).

#ifndef SEDML_PRIVACY_H_
#define SEDML_PRIVACY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sedml/ring.h"

namespace sedml {

// Position of a noise draw inside a run, for deterministic replay.
struct NoiseIndex {
  uint64_t sample = 0;
  uint32_t phase = 0;
  uint32_t cls = 0;
};

// N(0, sigma^2) via Box-Muller over a counter-based uniform pair, so the
// value depends only on (seed, index) and not on how many draws came before.
// sigma = 0 returns 0. Negative sigma throws UsageError.
double GaussSample(double sigma, uint64_t seed, const NoiseIndex& index);

// floor(x * scale) in two's complement. Throws RangeError when the result
// falls outside [-2^(l-1), 2^(l-1)).
RingElement FixedPointEncode(double x, uint64_t scale, Ring ring);
double FixedPointDecode(const RingElement& v, uint64_t scale);
// Same rule without a ring, for plaintext reference computations.
int64_t FixedPointEncodeInt(double x, uint64_t scale);

// eps(alpha) = per_alpha * alpha + constant. Every mechanism accounted here
// has an RDP curve of this shape; an infinite per_alpha stands for a
// mechanism without noise.
struct RdpCurve {
  double per_alpha = 0.0;
  double constant = 0.0;

  double operator()(double alpha) const;
  bool IsInfinite() const;
  bool operator==(const RdpCurve&) const = default;
};

// Per answered query: threshold check at 9 alpha / (2 sigma1^2) plus noisy
// argmax at alpha / sigma2^2. A zero sigma yields an infinite curve.
RdpCurve RdpOfProtocol(double sigma1, double sigma2);

// Pointwise sum. Throws UsageError on an empty list.
RdpCurve Compose(std::span<const RdpCurve> curves);
RdpCurve ComposeRepeated(const RdpCurve& curve, uint64_t times);

struct DpGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha_star = 0.0;  // order attaining the minimum
};

// The candidate orders searched before local refinement; all lie in (1, 512].
const std::vector<double>& AlphaGrid();

// min over alpha in (1, 512] of eps(alpha) + ln(1/delta) / (alpha - 1):
// a grid search followed by golden-section refinement around the best
// grid point. Throws UsageError unless 0 < delta < 1.
DpGuarantee RdpToDp(const RdpCurve& curve, double delta);

// Unconstrained-alpha optimum for one query of RdpOfProtocol:
// sqrt(2 (9/s1^2 + 2/s2^2) ln(1/delta)) + 9/(2 s1^2) + 1/s2^2.
double ClosedFormEpsilon(double sigma1, double sigma2, double delta);

// Epsilon of `queries` answered samples.
DpGuarantee EvaluateProtocol(double sigma1, double sigma2, double delta,
                             uint64_t queries);

struct NoiseSolution {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  DpGuarantee achieved;
};

// Finds sigma2 (with sigma1 = ratio * sigma2) so that EvaluateProtocol over
// `queries` matches `target_epsilon` to within 1e-4. Throws InfeasibleError
// when the target is out of reach and UsageError on bad arguments.
NoiseSolution SolveNoiseForEpsilon(double target_epsilon, double delta,
                                   double ratio, uint64_t queries);

}  // namespace sedml

#endif  // SEDML_PRIVACY_H_
