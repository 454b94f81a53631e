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

#include "sedml/gadgets.h"

#include <bit>

#include "sedml/errors.h"

namespace sedml {
namespace {

const Ring kZ2 = Ring::Z2();

// Node `k` of every element's row in a level with `width` nodes per element.
GpVec Gather(const GpVec& level, size_t width, size_t elements,
             const std::vector<size_t>& nodes) {
  GpVec out;
  for (size_t p = 0; p < 2; ++p) {
    out.g.v[p].reserve(elements * nodes.size());
    out.p.v[p].reserve(elements * nodes.size());
    for (size_t e = 0; e < elements; ++e) {
      for (size_t k : nodes) {
        out.g.v[p].push_back(level.g.v[p][e * width + k]);
        out.p.v[p].push_back(level.p.v[p][e * width + k]);
      }
    }
  }
  return out;
}

void RequireComparableWidth(const SharedVec& a, const SharedVec& b) {
  if (a.ring != b.ring) throw UsageError("operand rings differ");
  if (a.size() != b.size()) throw UsageError("operand length mismatch");
  MsbZ2Triples(a.ring.bits());  // validates the width
}

}  // namespace

GpVec GpCombine(const Link& link, TriplePair& triples, const GpVec& hi,
                const GpVec& lo) {
  const size_t m = hi.size();
  if (lo.size() != m) throw UsageError("operand length mismatch");
  SharedVec x = lo.g;  // G_lo * P_hi
  x.Append(lo.p);      // P_lo * P_hi
  SharedVec y = hi.p;
  y.Append(hi.p);
  const SharedVec prod =
      BeaverMul(link, triples, TripleKind::kZ2, x, y, StepTag::kCarryLevel);
  GpVec out;
  out.g = hi.g + prod.Slice(0, m);
  out.p = prod.Slice(m, m);
  return out;
}

SharedVec MsbExtract(const Link& link, TriplePair& triples, const SharedVec& f) {
  const unsigned l = f.ring.bits();
  MsbZ2Triples(l);  // validates the width
  const size_t n = f.size();
  const unsigned levels = static_cast<unsigned>(std::countr_zero(l));  // log2 l

  // Step 2: S0's share bits are x, S1's share bits are y; [x] = (x, 0),
  // [y] = (0, y), and d = x + y.
  SharedVec x(kZ2, n * l), y(kZ2, n * l);
  for (size_t e = 0; e < n; ++e) {
    for (unsigned j = 0; j < l; ++j) {
      x.v[0][e * l + j] = (f.v[0][e] >> j) & 1;
      y.v[1][e * l + j] = (f.v[1][e] >> j) & 1;
    }
  }

  // Step 3: G_j = x_j y_j (one batched round), P_j = x_j + y_j.
  GpVec leaves;
  leaves.g = BeaverMul(link, triples, TripleKind::kZ2, x, y, StepTag::kAndGates);
  leaves.p = x + y;

  // Steps 4 and 5a: level 1 keeps bit 0 alone and pairs (2k, 2k-1).
  const size_t half = l / 2;
  std::vector<size_t> hi_idx, lo_idx;
  for (size_t k = 1; k < half; ++k) {
    hi_idx.push_back(2 * k);
    lo_idx.push_back(2 * k - 1);
  }
  const GpVec combined = GpCombine(link, triples, Gather(leaves, l, n, hi_idx),
                                   Gather(leaves, l, n, lo_idx));
  GpVec level;
  size_t width = half;
  for (size_t p = 0; p < 2; ++p) {
    level.g.v[p].resize(n * width);
    level.p.v[p].resize(n * width);
    for (size_t e = 0; e < n; ++e) {
      level.g.v[p][e * width] = leaves.g.v[p][e * l];
      level.p.v[p][e * width] = leaves.p.v[p][e * l];
      for (size_t k = 1; k < width; ++k) {
        level.g.v[p][e * width + k] = combined.g.v[p][e * (width - 1) + k - 1];
        level.p.v[p][e * width + k] = combined.p.v[p][e * (width - 1) + k - 1];
      }
    }
  }

  // Step 5b: levels 2 .. log l - 1 combine neighbours (2k+1) o (2k).
  for (unsigned t = 2; t < levels; ++t) {
    const size_t next = width / 2;
    hi_idx.clear();
    lo_idx.clear();
    for (size_t k = 0; k < next; ++k) {
      hi_idx.push_back(2 * k + 1);
      lo_idx.push_back(2 * k);
    }
    level = GpCombine(link, triples, Gather(level, width, n, hi_idx),
                      Gather(level, width, n, lo_idx));
    width = next;
  }

  // Step 5c: c_{l-1} = G_1 + G_0 P_1 over the last two nodes.
  SharedVec g0(kZ2, n), g1(kZ2, n), p1(kZ2, n);
  for (size_t p = 0; p < 2; ++p) {
    for (size_t e = 0; e < n; ++e) {
      g0.v[p][e] = level.g.v[p][e * width];
      g1.v[p][e] = level.g.v[p][e * width + 1];
      p1.v[p][e] = level.p.v[p][e * width + 1];
    }
  }
  const SharedVec carry =
      g1 + BeaverMul(link, triples, TripleKind::kZ2, g0, p1, StepTag::kCarryLevel);

  // Step 5d: e = d_{l-1} + c_{l-1}.
  SharedVec msb(kZ2, n);
  for (size_t e = 0; e < n; ++e) {
    msb.v[0][e] = kZ2.Add(x.v[0][e * l + l - 1], carry.v[0][e]);
    msb.v[1][e] = kZ2.Add(y.v[1][e * l + l - 1], carry.v[1][e]);
  }
  return msb;
}

SharedVec BitToArith(const Link& link, TriplePair& triples, const SharedVec& bits,
                     Ring ring) {
  if (!bits.ring.is_boolean()) throw UsageError("expected Z2 shares");
  const SharedVec w = CrossMul(link, triples, ring, bits.v[0], bits.v[1]);
  SharedVec out(ring, bits.size());
  for (size_t p = 0; p < 2; ++p) {
    for (size_t i = 0; i < bits.size(); ++i) {
      out.v[p][i] = ring.Sub(bits.v[p][i], ring.Mul(2, w.v[p][i]));
    }
  }
  return out;
}

SharedVec Scmp(const Link& link, TriplePair& triples, const SharedVec& a,
               const SharedVec& b) {
  RequireComparableWidth(a, b);
  const SharedVec bits = MsbExtract(link, triples, a - b);
  return BitToArith(link, triples, bits, a.ring);
}

SharedVec ObliviousSelectMax(const Link& link, TriplePair& triples,
                             const SharedVec& a, const SharedVec& b,
                             const SharedVec& e) {
  if (a.ring != b.ring || a.ring != e.ring) throw UsageError("operand rings differ");
  if (a.size() != b.size() || a.size() != e.size()) {
    throw UsageError("operand length mismatch");
  }
  return a + BeaverMul(link, triples, TripleKind::kZ2l, e, b - a);
}

SharedVec ObliviousSelectIndex(const std::vector<uint64_t>& p,
                               const std::vector<uint64_t>& q,
                               const SharedVec& e) {
  if (p.size() != e.size() || q.size() != e.size()) {
    throw UsageError("operand length mismatch");
  }
  const Ring r = e.ring;
  SharedVec s(r, e.size());
  for (size_t i = 0; i < e.size(); ++i) {
    const uint64_t diff = r.Sub(q[i], p[i]);
    s.v[0][i] = r.Add(p[i], r.Mul(e.v[0][i], diff));
    s.v[1][i] = r.Mul(e.v[1][i], diff);
  }
  return s;
}

SharedVec CompareSelectMax(const Link& link, TriplePair& triples,
                           const SharedVec& a, const SharedVec& b) {
  RequireComparableWidth(a, b);
  const Ring r = a.ring;
  const size_t n = a.size();
  const SharedVec bits = MsbExtract(link, triples, a - b);
  const SharedVec delta = b - a;

  // S0 feeds (p1, d0 (1 - 2 p1)); S1 feeds (d1 (1 - 2 p2), p2).
  std::vector<uint64_t> from_s0(2 * n), from_s1(2 * n);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t p1 = bits.v[0][i];
    const uint64_t p2 = bits.v[1][i];
    from_s0[i] = p1;
    from_s0[n + i] = r.Mul(delta.v[0][i], r.Sub(1, r.Mul(2, p1)));
    from_s1[i] = r.Mul(delta.v[1][i], r.Sub(1, r.Mul(2, p2)));
    from_s1[n + i] = p2;
  }
  const SharedVec w = CrossMul(link, triples, r, from_s0, from_s1);

  SharedVec d(r, n);
  for (size_t p = 0; p < 2; ++p) {
    for (size_t i = 0; i < n; ++i) {
      const uint64_t own = r.Mul(bits.v[p][i], delta.v[p][i]);
      d.v[p][i] = r.Add(r.Add(a.v[p][i], own), r.Add(w.v[p][i], w.v[p][n + i]));
    }
  }
  return d;
}

}  // namespace sedml
