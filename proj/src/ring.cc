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

#include "sedml/ring.h"

#include <string>

#include "sedml/errors.h"

namespace sedml {
namespace {

void RequireSameRing(Ring a, Ring b) {
  if (a != b) {
    throw UsageError("ring width mismatch: " + std::to_string(a.bits()) +
                     " vs " + std::to_string(b.bits()));
  }
}

void RequireSameParty(const Share& a, const Share& b) {
  if (a.party != b.party) throw UsageError("operands belong to different parties");
  RequireSameRing(a.element.ring(), b.element.ring());
}

}  // namespace

Ring::Ring(unsigned bits) {
  if (bits < 1 || bits > 64) {
    throw UsageError("ring width must be in [1, 64], got " + std::to_string(bits));
  }
  bits_ = static_cast<uint8_t>(bits);
  mask_ = bits == 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

int64_t Ring::ToSigned(uint64_t v) const {
  v &= mask_;
  if (bits_ == 64) return static_cast<int64_t>(v);
  if (Msb(v)) return static_cast<int64_t>(v) - static_cast<int64_t>(mask_) - 1;
  return static_cast<int64_t>(v);
}

RingElement RingElement::operator+(const RingElement& o) const {
  RequireSameRing(ring_, o.ring_);
  return RingElement(ring_.Add(value_, o.value_), ring_);
}

RingElement RingElement::operator-(const RingElement& o) const {
  RequireSameRing(ring_, o.ring_);
  return RingElement(ring_.Sub(value_, o.value_), ring_);
}

RingElement RingElement::operator*(const RingElement& o) const {
  RequireSameRing(ring_, o.ring_);
  return RingElement(ring_.Mul(value_, o.value_), ring_);
}

std::pair<Share, Share> ShareWithMask(const RingElement& secret, uint64_t mask) {
  const Ring r = secret.ring();
  return {Share{RingElement(r.Sub(secret.value(), mask), r), Party::kS0},
          Share{RingElement(mask, r), Party::kS1}};
}

std::pair<Share, Share> ShareSecret(const RingElement& secret, Rng& rng) {
  return ShareWithMask(secret, rng.NextBits(secret.ring().bits()));
}

RingElement Reconstruct(const Share& s0, const Share& s1) {
  if (s0.party != Party::kS0 || s1.party != Party::kS1) {
    throw UsageError("reconstruct expects (S0 share, S1 share)");
  }
  RequireSameRing(s0.element.ring(), s1.element.ring());
  return s0.element + s1.element;
}

Share AddLocal(const Share& a, const Share& b) {
  RequireSameParty(a, b);
  return Share{a.element + b.element, a.party};
}

Share SubLocal(const Share& a, const Share& b) {
  RequireSameParty(a, b);
  return Share{a.element - b.element, a.party};
}

Share MulConst(const Share& a, const RingElement& c) {
  RequireSameRing(a.element.ring(), c.ring());
  return Share{a.element * c, a.party};
}

Share AddConst(const Share& a, const RingElement& c) {
  RequireSameRing(a.element.ring(), c.ring());
  if (a.party == Party::kS1) return a;
  return Share{a.element + c, a.party};
}

SharedVec SharedVec::Public(Ring r, const std::vector<uint64_t>& values) {
  SharedVec out(r, values.size());
  for (size_t i = 0; i < values.size(); ++i) out.v[0][i] = r.Reduce(values[i]);
  return out;
}

SharedVec SharedVec::FromShares(const Share& s0, const Share& s1) {
  if (s0.party != Party::kS0 || s1.party != Party::kS1) {
    throw UsageError("expected (S0 share, S1 share)");
  }
  RequireSameRing(s0.element.ring(), s1.element.ring());
  SharedVec out(s0.element.ring(), 1);
  out.v[0][0] = s0.element.value();
  out.v[1][0] = s1.element.value();
  return out;
}

SharedVec SharedVec::Slice(size_t begin, size_t count) const {
  if (begin + count > size()) throw UsageError("slice out of range");
  SharedVec out(ring);
  for (size_t p = 0; p < 2; ++p) {
    out.v[p].assign(v[p].begin() + static_cast<std::ptrdiff_t>(begin),
                    v[p].begin() + static_cast<std::ptrdiff_t>(begin + count));
  }
  return out;
}

void SharedVec::Append(const SharedVec& other) {
  RequireSameRing(ring, other.ring);
  for (size_t p = 0; p < 2; ++p) {
    v[p].insert(v[p].end(), other.v[p].begin(), other.v[p].end());
  }
}

SharedVec operator+(const SharedVec& a, const SharedVec& b) {
  RequireSameRing(a.ring, b.ring);
  if (a.size() != b.size()) throw UsageError("length mismatch");
  SharedVec out(a.ring, a.size());
  for (size_t p = 0; p < 2; ++p) {
    for (size_t i = 0; i < a.size(); ++i) out.v[p][i] = a.ring.Add(a.v[p][i], b.v[p][i]);
  }
  return out;
}

SharedVec operator-(const SharedVec& a, const SharedVec& b) {
  RequireSameRing(a.ring, b.ring);
  if (a.size() != b.size()) throw UsageError("length mismatch");
  SharedVec out(a.ring, a.size());
  for (size_t p = 0; p < 2; ++p) {
    for (size_t i = 0; i < a.size(); ++i) out.v[p][i] = a.ring.Sub(a.v[p][i], b.v[p][i]);
  }
  return out;
}

std::vector<uint64_t> ReconstructAll(const SharedVec& s) {
  std::vector<uint64_t> out(s.size());
  for (size_t i = 0; i < s.size(); ++i) out[i] = s.ring.Add(s.v[0][i], s.v[1][i]);
  return out;
}

SharedVec ShareAll(Ring ring, const std::vector<uint64_t>& secrets, Rng& rng) {
  SharedVec out(ring, secrets.size());
  for (size_t i = 0; i < secrets.size(); ++i) {
    auto [s0, s1] = ShareSecret(RingElement(secrets[i], ring), rng);
    out.v[0][i] = s0.element.value();
    out.v[1][i] = s1.element.value();
  }
  return out;
}

}  // namespace sedml
