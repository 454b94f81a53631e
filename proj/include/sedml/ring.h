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

// Arithmetic over Z_{2^l} and 2-of-2 additive secret sharing. The boolean
// ring Z_2 is the l = 1 case, so bit shares use the same types.

#ifndef SEDML_RING_H_
#define SEDML_RING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "sedml/rng.h"

namespace sedml {

enum class Party : uint8_t { kS0 = 0, kS1 = 1 };

constexpr size_t Index(Party p) { return static_cast<size_t>(p); }

class Ring {
 public:
  // Throws UsageError unless 1 <= bits <= 64.
  explicit Ring(unsigned bits = 64);

  static Ring Z2() { return Ring(1); }

  unsigned bits() const { return bits_; }
  uint64_t mask() const { return mask_; }
  bool is_boolean() const { return bits_ == 1; }

  uint64_t Reduce(uint64_t v) const { return v & mask_; }
  uint64_t Add(uint64_t a, uint64_t b) const { return (a + b) & mask_; }
  uint64_t Sub(uint64_t a, uint64_t b) const { return (a - b) & mask_; }
  uint64_t Mul(uint64_t a, uint64_t b) const { return (a * b) & mask_; }
  uint64_t Neg(uint64_t a) const { return (0 - a) & mask_; }

  // Two's-complement view: values in [2^(l-1), 2^l) are negative.
  int64_t ToSigned(uint64_t v) const;
  uint64_t FromSigned(int64_t v) const { return static_cast<uint64_t>(v) & mask_; }
  // Largest magnitude m with [-m, m) representable: 2^(l-1).
  uint64_t SignedBound() const { return uint64_t{1} << (bits_ - 1); }

  uint64_t Msb(uint64_t v) const { return (v >> (bits_ - 1)) & 1; }

  bool operator==(const Ring&) const = default;

 private:
  uint8_t bits_;
  uint64_t mask_;
};

class RingElement {
 public:
  RingElement(uint64_t value, Ring ring)
      : value_(ring.Reduce(value)), ring_(ring) {}
  static RingElement FromSigned(int64_t v, Ring ring) {
    return RingElement(ring.FromSigned(v), ring);
  }

  uint64_t value() const { return value_; }
  Ring ring() const { return ring_; }
  int64_t signed_value() const { return ring_.ToSigned(value_); }

  // Mixed widths throw UsageError.
  RingElement operator+(const RingElement& o) const;
  RingElement operator-(const RingElement& o) const;
  RingElement operator*(const RingElement& o) const;
  RingElement operator-() const { return RingElement(ring_.Neg(value_), ring_); }

  bool operator==(const RingElement&) const = default;

 private:
  uint64_t value_;
  Ring ring_;
};

struct Share {
  RingElement element;
  Party party;
  bool operator==(const Share&) const = default;
};

// A shared bit: a Share over Z_2.
using BitShare = Share;

// share0 = secret - mask, share1 = mask.
std::pair<Share, Share> ShareWithMask(const RingElement& secret, uint64_t mask);
// share1 is uniform given the rng.
std::pair<Share, Share> ShareSecret(const RingElement& secret, Rng& rng);

// Throws UsageError on party tags other than (S0, S1) or mismatched rings.
RingElement Reconstruct(const Share& s0, const Share& s1);

// Local (non-interactive) share arithmetic. Operands must belong to the same
// party and ring.
Share AddLocal(const Share& a, const Share& b);
Share SubLocal(const Share& a, const Share& b);
Share MulConst(const Share& a, const RingElement& c);
// Adds a public constant: only S0 absorbs it.
Share AddConst(const Share& a, const RingElement& c);

// Both servers' shares of a batch of values in one ring, indexed by party.
// In the joint simulation each party's vector is only ever touched by that
// party's local computation; cross-party data flows through the fabric.
struct SharedVec {
  Ring ring;
  std::array<std::vector<uint64_t>, 2> v;

  explicit SharedVec(Ring r, size_t n = 0) : ring(r) {
    v[0].assign(n, 0);
    v[1].assign(n, 0);
  }

  size_t size() const { return v[0].size(); }
  std::vector<uint64_t>& operator[](Party p) { return v[Index(p)]; }
  const std::vector<uint64_t>& operator[](Party p) const { return v[Index(p)]; }

  // Public constant as a trivial sharing: S0 holds the value, S1 holds 0.
  static SharedVec Public(Ring r, const std::vector<uint64_t>& values);
  static SharedVec FromShares(const Share& s0, const Share& s1);

  SharedVec Slice(size_t begin, size_t count) const;
  void Append(const SharedVec& other);
  Share At(Party p, size_t i) const {
    return Share{RingElement(v[Index(p)][i], ring), p};
  }

  friend SharedVec operator+(const SharedVec& a, const SharedVec& b);
  friend SharedVec operator-(const SharedVec& a, const SharedVec& b);
};

// Plaintext reconstruction of every element. Test and requester use only;
// the protocol reveals values to servers through audited paths.
std::vector<uint64_t> ReconstructAll(const SharedVec& s);
SharedVec ShareAll(Ring ring, const std::vector<uint64_t>& secrets, Rng& rng);

}  // namespace sedml

#endif  // SEDML_RING_H_
