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

// Beaver multiplication triples: the offline dealer, per-party stores with
// single-use enforcement, the binary store format, and the one-round
// multiplication protocols that consume them.

#ifndef SEDML_TRIPLES_H_
#define SEDML_TRIPLES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sedml/ring.h"
#include "sedml/rng.h"
#include "sedml/simnet.h"

namespace sedml {

enum class TripleKind : uint8_t {
  kZ2 = 0,     // (t1, t2, t1*t2) over Z_2
  kZ2l = 1,    // (t1, t2, t1*t2) over Z_{2^l}
  // Over Z_{2^l} for products x*y where S0 alone holds x and S1 alone holds
  // y. S0 knows t1 in the clear, S1 knows t2 in the clear, t3 is shared.
  kCross = 2,
};
inline constexpr size_t kNumTripleKinds = 3;

// One party's view of one triple. For kCross, S0 stores (t1, 0, [t3]_0) and
// S1 stores (0, t2, [t3]_1).
struct TripleShare {
  uint64_t t1 = 0;
  uint64_t t2 = 0;
  uint64_t t3 = 0;
  bool operator==(const TripleShare&) const = default;
};

struct TripleBudget {
  uint64_t z2 = 0;
  uint64_t z2l = 0;
  uint64_t cross = 0;

  uint64_t& operator[](TripleKind k);
  uint64_t operator[](TripleKind k) const;
  TripleBudget& operator+=(const TripleBudget& o);
  bool Covers(const TripleBudget& need) const {
    return z2 >= need.z2 && z2l >= need.z2l && cross >= need.cross;
  }
  bool operator==(const TripleBudget&) const = default;
};

class TripleStore {
 public:
  TripleStore(Party party, unsigned ring_bits);

  Party party() const { return party_; }
  unsigned ring_bits() const { return ring_bits_; }
  Ring RingOf(TripleKind k) const {
    return k == TripleKind::kZ2 ? Ring::Z2() : Ring(ring_bits_);
  }

  void Push(TripleKind k, const TripleShare& t);
  size_t Size(TripleKind k) const { return triples_[Slot(k)].size(); }
  size_t Consumed(TripleKind k) const { return consumed_count_[Slot(k)]; }
  size_t Remaining(TripleKind k) const { return Size(k) - Consumed(k); }
  TripleBudget RemainingBudget() const;
  TripleBudget ConsumedBudget() const;

  // Next `n` unconsumed triples in dealing order, marked consumed.
  // Throws ProtocolError when fewer than n remain.
  std::vector<TripleShare> Take(TripleKind k, size_t n);
  // Consumes one specific triple; reuse throws ProtocolError.
  TripleShare Consume(TripleKind k, size_t index);
  const TripleShare& Peek(TripleKind k, size_t index) const;

  // Binary format, one section per kind in kind order. Section header:
  // "SEDT", version u8, ring tag u8, l u8, count u64 LE; then each triple as
  // t1, t2, t3, each ceil(l/8) bytes LE. Consumption state is not stored.
  void Save(std::ostream& out) const;
  static TripleStore Load(std::istream& in, Party party);

 private:
  static size_t Slot(TripleKind k) { return static_cast<size_t>(k); }

  Party party_;
  unsigned ring_bits_;
  std::array<std::vector<TripleShare>, kNumTripleKinds> triples_;
  std::array<std::vector<bool>, kNumTripleKinds> consumed_;
  std::array<size_t, kNumTripleKinds> cursor_{};
  std::array<size_t, kNumTripleKinds> consumed_count_{};
};

using TriplePair = std::array<TripleStore, 2>;

// Trusted offline dealer (the requester role).
TriplePair DealTriples(const TripleBudget& budget, unsigned ring_bits,
                       Rng& rng);

// Z_2 products in one MSB extraction at width l: l AND gates, two per carry
// operator for the l - 3 operators of the tree, one for the final carry.
uint64_t MsbZ2Triples(unsigned ring_bits);

// Worst-case triples for `samples` full protocol runs (every sample assumed
// to pass the threshold check). Throws UsageError unless l is a power of two
// in [4, 64] and classes >= 2.
TripleBudget CountTriples(unsigned ring_bits, uint32_t classes,
                          uint64_t samples);

// Batched Beaver multiplication in one round: element-wise x*y.
// kind must be kZ2 or kZ2l and match the operand ring.
SharedVec BeaverMul(const Link& link, TriplePair& triples, TripleKind kind,
                    const SharedVec& x, const SharedVec& y,
                    StepTag step = StepTag::kBeaverMul);

// Single multiplication with an explicitly chosen triple (same index in both
// stores). A triple consumed before throws ProtocolError.
SharedVec BeaverMulWith(const Link& link, TriplePair& triples, TripleKind kind,
                        size_t triple_index, const SharedVec& x,
                        const SharedVec& y);

// Batched single-party-input products in one round: x[i] is known only to S0,
// y[i] only to S1. Each server sends one masked element per product.
SharedVec CrossMul(const Link& link, TriplePair& triples, Ring ring,
                   const std::vector<uint64_t>& x_of_s0,
                   const std::vector<uint64_t>& y_of_s1);

}  // namespace sedml

#endif  // SEDML_TRIPLES_H_
