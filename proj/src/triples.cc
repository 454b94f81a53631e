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

#include "sedml/triples.h"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "sedml/errors.h"

namespace sedml {
namespace {

constexpr char kMagic[4] = {'S', 'E', 'D', 'T'};
constexpr uint8_t kFormatVersion = 1;

const char* KindName(TripleKind k) {
  switch (k) {
    case TripleKind::kZ2:
      return "Z2";
    case TripleKind::kZ2l:
      return "Z2l";
    case TripleKind::kCross:
      return "cross";
  }
  return "?";
}

void WriteLe(std::ostream& out, uint64_t v, size_t bytes) {
  for (size_t i = 0; i < bytes; ++i) out.put(static_cast<char>(v >> (8 * i)));
}

uint64_t ReadLe(std::istream& in, size_t bytes) {
  uint64_t v = 0;
  for (size_t i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == EOF) throw UsageError("truncated triple file");
    v |= uint64_t{static_cast<uint8_t>(c)} << (8 * i);
  }
  return v;
}

// Both stores must hold triples of this kind at the same positions.
void RequireAligned(const TriplePair& t) {
  if (t[0].party() != Party::kS0 || t[1].party() != Party::kS1) {
    throw UsageError("triple stores must be ordered (S0, S1)");
  }
  if (t[0].ring_bits() != t[1].ring_bits()) {
    throw UsageError("triple stores disagree on ring width");
  }
}

SharedVec FinishBeaver(const Ring r, const SharedVec& x, const SharedVec& y,
                       const std::array<std::vector<TripleShare>, 2>& tri,
                       const std::array<std::vector<uint64_t>, 2>& received) {
  const size_t n = x.size();
  SharedVec z(r, n);
  for (size_t p = 0; p < 2; ++p) {
    for (size_t i = 0; i < n; ++i) {
      const uint64_t e = r.Add(r.Sub(x.v[p][i], tri[p][i].t1), received[p][i]);
      const uint64_t f = r.Add(r.Sub(y.v[p][i], tri[p][i].t2), received[p][n + i]);
      uint64_t s = r.Add(r.Mul(tri[p][i].t1, f), r.Mul(tri[p][i].t2, e));
      s = r.Add(s, tri[p][i].t3);
      if (p == 1) s = r.Add(s, r.Mul(e, f));
      z.v[p][i] = s;
    }
  }
  return z;
}

SharedVec RunBeaver(const Link& link, const Ring r, const SharedVec& x,
                    const SharedVec& y,
                    const std::array<std::vector<TripleShare>, 2>& tri,
                    StepTag step) {
  const size_t n = x.size();
  std::array<std::vector<uint64_t>, 2> sent;
  for (size_t p = 0; p < 2; ++p) {
    sent[p].resize(2 * n);
    for (size_t i = 0; i < n; ++i) {
      sent[p][i] = r.Sub(x.v[p][i], tri[p][i].t1);
      sent[p][n + i] = r.Sub(y.v[p][i], tri[p][i].t2);
    }
  }
  const auto received = link.Exchange(step, r.bits(), sent);
  return FinishBeaver(r, x, y, tri, received);
}

}  // namespace

uint64_t& TripleBudget::operator[](TripleKind k) {
  switch (k) {
    case TripleKind::kZ2:
      return z2;
    case TripleKind::kZ2l:
      return z2l;
    case TripleKind::kCross:
      break;
  }
  return cross;
}

uint64_t TripleBudget::operator[](TripleKind k) const {
  return const_cast<TripleBudget&>(*this)[k];
}

TripleBudget& TripleBudget::operator+=(const TripleBudget& o) {
  z2 += o.z2;
  z2l += o.z2l;
  cross += o.cross;
  return *this;
}

TripleStore::TripleStore(Party party, unsigned ring_bits)
    : party_(party), ring_bits_(ring_bits) {
  (void)Ring(ring_bits);  // validates width
}

void TripleStore::Push(TripleKind k, const TripleShare& t) {
  const Ring r = RingOf(k);
  triples_[Slot(k)].push_back({r.Reduce(t.t1), r.Reduce(t.t2), r.Reduce(t.t3)});
  consumed_[Slot(k)].push_back(false);
}

TripleBudget TripleStore::RemainingBudget() const {
  TripleBudget b;
  for (TripleKind k : {TripleKind::kZ2, TripleKind::kZ2l, TripleKind::kCross}) {
    b[k] = Remaining(k);
  }
  return b;
}

TripleBudget TripleStore::ConsumedBudget() const {
  TripleBudget b;
  for (TripleKind k : {TripleKind::kZ2, TripleKind::kZ2l, TripleKind::kCross}) {
    b[k] = Consumed(k);
  }
  return b;
}

std::vector<TripleShare> TripleStore::Take(TripleKind k, size_t n) {
  const size_t s = Slot(k);
  std::vector<TripleShare> out;
  out.reserve(n);
  size_t& cur = cursor_[s];
  while (out.size() < n) {
    while (cur < triples_[s].size() && consumed_[s][cur]) ++cur;
    if (cur >= triples_[s].size()) {
      throw ProtocolError(std::string("out of ") + KindName(k) +
                          " triples: needed " + std::to_string(n) + ", had " +
                          std::to_string(out.size()));
    }
    consumed_[s][cur] = true;
    ++consumed_count_[s];
    out.push_back(triples_[s][cur++]);
  }
  return out;
}

TripleShare TripleStore::Consume(TripleKind k, size_t index) {
  const size_t s = Slot(k);
  if (index >= triples_[s].size()) {
    throw ProtocolError(std::string("no ") + KindName(k) + " triple at index " +
                        std::to_string(index));
  }
  if (consumed_[s][index]) {
    throw ProtocolError(std::string(KindName(k)) + " triple " +
                        std::to_string(index) + " was already consumed");
  }
  consumed_[s][index] = true;
  ++consumed_count_[s];
  return triples_[s][index];
}

const TripleShare& TripleStore::Peek(TripleKind k, size_t index) const {
  if (index >= triples_[Slot(k)].size()) throw UsageError("triple index out of range");
  return triples_[Slot(k)][index];
}

void TripleStore::Save(std::ostream& out) const {
  for (TripleKind k : {TripleKind::kZ2, TripleKind::kZ2l, TripleKind::kCross}) {
    const unsigned bits = RingOf(k).bits();
    const size_t eb = (bits + 7) / 8;
    out.write(kMagic, 4);
    out.put(static_cast<char>(kFormatVersion));
    out.put(static_cast<char>(static_cast<uint8_t>(k)));
    out.put(static_cast<char>(bits));
    WriteLe(out, triples_[Slot(k)].size(), 8);
    for (const TripleShare& t : triples_[Slot(k)]) {
      WriteLe(out, t.t1, eb);
      WriteLe(out, t.t2, eb);
      WriteLe(out, t.t3, eb);
    }
  }
  if (!out) throw UsageError("failed writing triple store");
}

TripleStore TripleStore::Load(std::istream& in, Party party) {
  struct Section {
    TripleKind kind;
    unsigned bits;
    std::vector<TripleShare> triples;
  };
  std::vector<Section> sections;
  while (in.peek() != EOF) {
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
      throw UsageError("bad triple file magic");
    }
    const uint64_t version = ReadLe(in, 1);
    if (version != kFormatVersion) {
      throw UsageError("unsupported triple file version " + std::to_string(version));
    }
    const uint64_t tag = ReadLe(in, 1);
    if (tag >= kNumTripleKinds) throw UsageError("bad ring tag in triple file");
    const unsigned bits = static_cast<unsigned>(ReadLe(in, 1));
    const Ring r{bits};
    const uint64_t count = ReadLe(in, 8);
    const size_t eb = (bits + 7) / 8;
    Section sec{static_cast<TripleKind>(tag), bits, {}};
    sec.triples.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      TripleShare t;
      t.t1 = r.Reduce(ReadLe(in, eb));
      t.t2 = r.Reduce(ReadLe(in, eb));
      t.t3 = r.Reduce(ReadLe(in, eb));
      sec.triples.push_back(t);
    }
    sections.push_back(std::move(sec));
  }
  unsigned ring_bits = 0;
  for (const Section& s : sections) {
    if (s.kind == TripleKind::kZ2 && s.bits != 1) {
      throw UsageError("Z2 section must declare l = 1");
    }
    if (s.kind != TripleKind::kZ2) {
      if (ring_bits != 0 && ring_bits != s.bits) {
        throw UsageError("triple file mixes ring widths");
      }
      ring_bits = s.bits;
    }
  }
  if (ring_bits == 0) throw UsageError("triple file has no Z2l or cross section");
  TripleStore store(party, ring_bits);
  for (const Section& s : sections) {
    for (const TripleShare& t : s.triples) store.Push(s.kind, t);
  }
  return store;
}

TriplePair DealTriples(const TripleBudget& budget, unsigned ring_bits, Rng& rng) {
  TriplePair out{TripleStore(Party::kS0, ring_bits),
                 TripleStore(Party::kS1, ring_bits)};
  for (TripleKind k : {TripleKind::kZ2, TripleKind::kZ2l}) {
    const Ring r = out[0].RingOf(k);
    for (uint64_t i = 0; i < budget[k]; ++i) {
      const uint64_t t1 = rng.NextBits(r.bits());
      const uint64_t t2 = rng.NextBits(r.bits());
      const uint64_t t3 = r.Mul(t1, t2);
      const uint64_t m1 = rng.NextBits(r.bits());
      const uint64_t m2 = rng.NextBits(r.bits());
      const uint64_t m3 = rng.NextBits(r.bits());
      out[0].Push(k, {r.Sub(t1, m1), r.Sub(t2, m2), r.Sub(t3, m3)});
      out[1].Push(k, {m1, m2, m3});
    }
  }
  const Ring r(ring_bits);
  for (uint64_t i = 0; i < budget.cross; ++i) {
    const uint64_t t1 = rng.NextBits(r.bits());
    const uint64_t t2 = rng.NextBits(r.bits());
    const uint64_t m3 = rng.NextBits(r.bits());
    out[0].Push(TripleKind::kCross, {t1, 0, r.Sub(r.Mul(t1, t2), m3)});
    out[1].Push(TripleKind::kCross, {0, t2, m3});
  }
  return out;
}

uint64_t MsbZ2Triples(unsigned ring_bits) {
  if (ring_bits < 4 || ring_bits > 64 || !std::has_single_bit(ring_bits)) {
    throw UsageError("ring width must be a power of two in [4, 64], got " +
                     std::to_string(ring_bits));
  }
  return 3 * uint64_t{ring_bits} - 5;
}

TripleBudget CountTriples(unsigned ring_bits, uint32_t classes, uint64_t samples) {
  const uint64_t msb = MsbZ2Triples(ring_bits);
  if (classes < 2) throw UsageError("need at least two classes");
  // Phase 1 and phase 3 each run N-1 fused compare-selects (two cross products
  // each); phase 2 runs one comparison with a single-product conversion.
  const uint64_t compares = 2 * (uint64_t{classes} - 1) + 1;
  TripleBudget b;
  b.z2 = samples * compares * msb;
  b.cross = samples * (4 * (uint64_t{classes} - 1) + 1);
  return b;
}

SharedVec BeaverMul(const Link& link, TriplePair& triples, TripleKind kind,
                    const SharedVec& x, const SharedVec& y, StepTag step) {
  RequireAligned(triples);
  if (kind == TripleKind::kCross) throw UsageError("use CrossMul for cross triples");
  const Ring r = triples[0].RingOf(kind);
  if (x.ring != r || y.ring != r) {
    throw UsageError("operand ring does not match the triple ring");
  }
  if (x.size() != y.size()) throw UsageError("operand length mismatch");
  std::array<std::vector<TripleShare>, 2> tri = {triples[0].Take(kind, x.size()),
                                                 triples[1].Take(kind, x.size())};
  return RunBeaver(link, r, x, y, tri, step);
}

SharedVec BeaverMulWith(const Link& link, TriplePair& triples, TripleKind kind,
                        size_t triple_index, const SharedVec& x,
                        const SharedVec& y) {
  RequireAligned(triples);
  if (kind == TripleKind::kCross) throw UsageError("use CrossMul for cross triples");
  const Ring r = triples[0].RingOf(kind);
  if (x.ring != r || y.ring != r) {
    throw UsageError("operand ring does not match the triple ring");
  }
  if (x.size() != 1 || y.size() != 1) throw UsageError("expected single operands");
  std::array<std::vector<TripleShare>, 2> tri = {
      std::vector<TripleShare>{triples[0].Consume(kind, triple_index)},
      std::vector<TripleShare>{triples[1].Consume(kind, triple_index)}};
  return RunBeaver(link, r, x, y, tri, StepTag::kBeaverMul);
}

SharedVec CrossMul(const Link& link, TriplePair& triples, Ring ring,
                   const std::vector<uint64_t>& x_of_s0,
                   const std::vector<uint64_t>& y_of_s1) {
  RequireAligned(triples);
  if (ring.bits() != triples[0].ring_bits()) {
    throw UsageError("operand ring does not match the triple ring");
  }
  const size_t n = x_of_s0.size();
  if (y_of_s1.size() != n) throw UsageError("operand length mismatch");
  const auto t0 = triples[0].Take(TripleKind::kCross, n);
  const auto t1 = triples[1].Take(TripleKind::kCross, n);

  std::array<std::vector<uint64_t>, 2> sent;
  sent[0].resize(n);
  sent[1].resize(n);
  for (size_t i = 0; i < n; ++i) {
    sent[0][i] = ring.Sub(x_of_s0[i], t0[i].t1);
    sent[1][i] = ring.Sub(y_of_s1[i], t1[i].t2);
  }
  const auto received = link.Exchange(StepTag::kCrossMul, ring.bits(), sent);

  SharedVec z(ring, n);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t u = sent[0][i];      // S0's own masked input
    const uint64_t v = received[0][i];  // S1's masked input, as seen by S0
    z.v[0][i] = ring.Add(ring.Add(ring.Mul(u, v), ring.Mul(t0[i].t1, v)), t0[i].t3);
    const uint64_t u_at_s1 = received[1][i];
    z.v[1][i] = ring.Add(ring.Mul(u_at_s1, t1[i].t2), t1[i].t3);
  }
  return z;
}

}  // namespace sedml
