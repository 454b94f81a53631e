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

// Secure comparison over additive shares. The sign bit of a - b is extracted
// with a carry-lookahead tree evaluated over Z_2 shares: party 0's share bits
// and party 1's share bits are the two addends, and the MSB of their sum is
// d_{l-1} + c_{l-1}. All gadgets are batched: every element of the input
// vectors goes through the same rounds together.

#ifndef SEDML_GADGETS_H_
#define SEDML_GADGETS_H_

#include <cstdint>
#include <vector>

#include "sedml/ring.h"
#include "sedml/simnet.h"
#include "sedml/triples.h"

namespace sedml {

// Carry generate/propagate signals, shared over Z_2.
struct GpVec {
  SharedVec g{Ring::Z2()};
  SharedVec p{Ring::Z2()};
  size_t size() const { return g.size(); }
};

// (G*, P*) = hi o lo with G* = G_hi + G_lo * P_hi and P* = P_lo * P_hi.
// Two Z_2 products per element, all in one round.
GpVec GpCombine(const Link& link, TriplePair& triples, const GpVec& hi,
                const GpVec& lo);

// Shares over Z_2 of bit l-1 of each reconstructed f. Consumes
// MsbZ2Triples(l) Z_2 triples per element and log2(l) + 1 rounds.
SharedVec MsbExtract(const Link& link, TriplePair& triples, const SharedVec& f);

// Lifts Z_2 bit shares to Z_{2^l} as p1 + p2 - 2 p1 p2, where p1 is S0's
// share bit and p2 is S1's. One cross triple and one round per batch.
SharedVec BitToArith(const Link& link, TriplePair& triples, const SharedVec& bits,
                     Ring ring);

// e = 1 if a < b else 0, signed two's-complement semantics, shared over
// Z_{2^l}. Requires |a - b| < 2^(l-1). log2(l) + 2 rounds.
SharedVec Scmp(const Link& link, TriplePair& triples, const SharedVec& a,
               const SharedVec& b);

// d = a + e (b - a), i.e. max(a, b) when e = Scmp(a, b); ties keep a.
// One Z_{2^l} triple per element, one round.
SharedVec ObliviousSelectMax(const Link& link, TriplePair& triples,
                             const SharedVec& a, const SharedVec& b,
                             const SharedVec& e);

// s = p + e (q - p) for public indices; local, no triples or rounds.
SharedVec ObliviousSelectIndex(const std::vector<uint64_t>& p,
                               const std::vector<uint64_t>& q,
                               const SharedVec& e);

// Scmp followed by ObliviousSelectMax with the bit-to-arithmetic conversion
// folded into the selection:
//   e * delta = p1 d0 + p2 d1 + p1 * (d1 (1 - 2 p2)) + (d0 (1 - 2 p1)) * p2
// where delta = b - a = d0 + d1. The two bracketed products are cross
// products, so the whole step costs the same log2(l) + 2 rounds as Scmp and
// never materialises e.
SharedVec CompareSelectMax(const Link& link, TriplePair& triples,
                           const SharedVec& a, const SharedVec& b);

}  // namespace sedml

#endif  // SEDML_GADGETS_H_
