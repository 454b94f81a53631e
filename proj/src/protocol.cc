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

#include "sedml/protocol.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "sedml/errors.h"
#include "sedml/gadgets.h"
#include "sedml/privacy.h"

namespace sedml {
namespace {

constexpr uint64_t kClientStream = 0x636c69656e74ULL;
constexpr uint64_t kDealerStream = 0x6465616c6572ULL;

SharedVec MaxOf(const Link& link, TriplePair& triples, const SharedVec& values,
                MaxStrategy strategy) {
  if (values.size() == 0) throw UsageError("empty vote vector");
  if (strategy == MaxStrategy::kSequential) {
    SharedVec best = values.Slice(0, 1);
    for (size_t i = 1; i < values.size(); ++i) {
      best = CompareSelectMax(link, triples, best, values.Slice(i, 1));
    }
    return best;
  }
  // Tournament: pair (0,1), (2,3), ...; an odd tail advances unopposed.
  SharedVec level = values;
  while (level.size() > 1) {
    const size_t pairs = level.size() / 2;
    SharedVec left(level.ring), right(level.ring);
    for (size_t k = 0; k < pairs; ++k) {
      left.Append(level.Slice(2 * k, 1));
      right.Append(level.Slice(2 * k + 1, 1));
    }
    SharedVec next = CompareSelectMax(link, triples, left, right);
    if (level.size() % 2 == 1) next.Append(level.Slice(level.size() - 1, 1));
    level = std::move(next);
  }
  return level;
}

}  // namespace

std::string ToString(MaxStrategy s) {
  return s == MaxStrategy::kSequential ? "sequential" : "tournament";
}

MaxStrategy ParseMaxStrategy(const std::string& s) {
  if (s == "sequential") return MaxStrategy::kSequential;
  if (s == "tournament") return MaxStrategy::kTournament;
  throw UsageError("unknown max strategy '" + s + "'");
}

uint64_t ProtocolConfig::ThresholdVotes() const {
  // The epsilon keeps products like 0.6 * 10 = 6.000000000000001 at 6.
  return static_cast<uint64_t>(std::ceil(threshold * teachers - 1e-9));
}

unsigned ProtocolConfig::IndexBits() const {
  return std::max(1u, static_cast<unsigned>(std::bit_width(classes - 1u)));
}

void ProtocolConfig::Validate() const {
  if (teachers < 1) throw UsageError("need at least one teacher");
  if (classes < 2) throw UsageError("need at least two classes");
  if (classes > (1u << 16)) throw UsageError("at most 65536 classes");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw UsageError("threshold must lie in (0, 1]");
  }
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) ||
      !std::isfinite(sigma2)) {
    throw UsageError("noise standard deviations must be finite and >= 0");
  }
  if (scale < 1) throw UsageError("scale must be at least 1");
  MsbZ2Triples(ring_bits);  // power of two in [4, 64]

  // Widest comparison operand is a packed phase-3 value; its difference with
  // another must stay below 2^(l-1). Noise is bounded at 10 sigma.
  const double magnitude =
      (teachers + 10.0 * std::max(sigma1, sigma2) + 1.0) * static_cast<double>(scale);
  const double packed = (magnitude + 1.0) * std::ldexp(1.0, static_cast<int>(IndexBits()));
  if (2.0 * packed >= std::ldexp(1.0, static_cast<int>(ring_bits) - 1)) {
    throw UsageError("ring of " + std::to_string(ring_bits) +
                     " bits is too narrow for K * scale with this noise; "
                     "lower --scale or use --ring-bits 64");
  }
}

PredictionVector::PredictionVector(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  size_t ones = 0;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) throw UsageError("prediction entries must be 0 or 1");
    if (bits_[i] == 1) {
      ++ones;
      label_ = static_cast<uint32_t>(i);
    }
  }
  if (ones != 1) throw UsageError("prediction vector must be one-hot");
}

PredictionVector PredictionVector::OneHot(uint32_t classes, uint32_t label) {
  if (label >= classes) throw UsageError("label out of range");
  std::vector<uint8_t> bits(classes, 0);
  bits[label] = 1;
  return PredictionVector(std::move(bits));
}

uint32_t AggregationOutcome::label() const {
  if (!label_) throw UsageError("no consensus label");
  return *label_;
}

std::string AggregationOutcome::ToString() const {
  return label_ ? "consensus(" + std::to_string(*label_) + ")" : "bottom";
}

SampleNoise DrawSampleNoise(const ProtocolConfig& config, uint64_t sample_id) {
  SampleNoise noise;
  noise.threshold = FixedPointEncodeInt(
      GaussSample(config.sigma1, config.seed, {sample_id, 2, 0}), config.scale);
  noise.per_class.resize(config.classes);
  for (uint32_t i = 0; i < config.classes; ++i) {
    noise.per_class[i] = FixedPointEncodeInt(
        GaussSample(config.sigma2, config.seed, {sample_id, 3, i}), config.scale);
  }
  return noise;
}

void RevealAudit::Record(uint64_t sample, Observer observer, std::string what,
                         uint64_t value) {
  events_.push_back(Event{sample, observer, std::move(what), value});
}

size_t RevealAudit::Count(uint64_t sample, Observer observer) const {
  return static_cast<size_t>(std::count_if(
      events_.begin(), events_.end(), [&](const Event& e) {
        return e.sample == sample && e.observer == observer;
      }));
}

std::pair<std::vector<uint64_t>, std::vector<uint64_t>> ClientShare(
    const std::vector<uint8_t>& y, uint64_t scale, Ring ring, Rng& rng) {
  const PredictionVector checked(y);  // rejects non-one-hot input
  std::vector<uint64_t> to_s0(y.size()), to_s1(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    const uint64_t r = rng.NextBits(ring.bits());
    to_s0[i] = r;
    to_s1[i] = ring.Sub(ring.Mul(y[i], ring.Reduce(scale)), r);
  }
  return {std::move(to_s0), std::move(to_s1)};
}

SharedVec Phase1HighestVote(const Link& link, TriplePair& triples,
                            const SharedVec& votes, MaxStrategy strategy) {
  return MaxOf(link, triples, votes, strategy);
}

uint64_t Phase2ThresholdCheck(const Link& link, TriplePair& triples,
                              const SharedVec& n_star, uint64_t threshold_scaled,
                              int64_t noise, RevealAudit* audit, uint64_t sample) {
  if (n_star.size() != 1) throw UsageError("expected a single shared maximum");
  const Ring r = n_star.ring;
  SharedVec noisy = n_star;
  noisy.v[0][0] = r.Add(noisy.v[0][0], r.FromSigned(noise));  // S0 only
  const SharedVec threshold = SharedVec::Public(r, {threshold_scaled});
  const SharedVec t_shared = Scmp(link, triples, noisy, threshold);

  // Open t: each server sends its share and adds the one it receives.
  const auto received =
      link.Exchange(StepTag::kReveal, r.bits(), {t_shared.v[0], t_shared.v[1]});
  const uint64_t t_at_s0 = r.Add(t_shared.v[0][0], received[0][0]);
  const uint64_t t_at_s1 = r.Add(t_shared.v[1][0], received[1][0]);
  if (t_at_s0 != t_at_s1 || t_at_s0 > 1) {
    throw ProtocolError("threshold bit opened inconsistently");
  }
  if (audit) audit->Record(sample, RevealAudit::Observer::kServers, "threshold_bit", t_at_s0);
  return t_at_s0;
}

SharedVec Phase3ConsensusLabel(const Link& link, TriplePair& triples,
                               const SharedVec& votes,
                               std::span<const int64_t> noise,
                               MaxStrategy strategy, unsigned index_bits,
                               uint64_t t) {
  if (t != 0) throw UsageError("consensus label requested without consensus");
  if (noise.size() != votes.size()) throw UsageError("one noise value per class");
  const Ring r = votes.ring;
  const size_t n = votes.size();
  if (index_bits >= r.bits() || (uint64_t{1} << index_bits) < n) {
    throw UsageError("index bits cannot hold every class");
  }
  const uint64_t radix = uint64_t{1} << index_bits;

  SharedVec packed(r, n);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t m0 = r.Add(votes.v[0][i], r.FromSigned(noise[i]));
    const uint64_t m1 = votes.v[1][i];
    packed.v[0][i] = r.Add(r.Mul(m0, radix), radix - 1 - i);
    packed.v[1][i] = r.Mul(m1, radix);
  }
  const SharedVec best = MaxOf(link, triples, packed, strategy);

  // The low bits of the sum are the sum of the low bits mod 2^b.
  const Ring index_ring(index_bits);
  SharedVec index(index_ring, 1);
  index.v[0][0] = index_ring.Sub(radix - 1, best.v[0][0]);
  index.v[1][0] = index_ring.Neg(best.v[1][0]);
  return index;
}

SampleResult RunSampleWith(const ProtocolConfig& config, uint64_t sample_id,
                           std::span<const PredictionVector> predictions,
                           Fabric& fabric, TriplePair& triples, RevealAudit* audit) {
  config.Validate();
  if (predictions.size() != config.teachers) {
    throw UsageError("expected one prediction per teacher");
  }
  for (const PredictionVector& y : predictions) {
    if (y.size() != config.classes) throw UsageError("prediction has wrong class count");
  }
  if (triples[0].ring_bits() != config.ring_bits ||
      triples[1].ring_bits() != config.ring_bits) {
    throw UsageError("triple stores were dealt for another ring width");
  }
  const TripleBudget need = CountTriples(config.ring_bits, config.classes, 1);
  if (!triples[0].RemainingBudget().Covers(need) ||
      !triples[1].RemainingBudget().Covers(need)) {
    throw ProtocolError("insufficient triples for a full run of sample " +
                        std::to_string(sample_id));
  }
  const TripleBudget before = triples[0].ConsumedBudget();
  const Ring ring = config.ring();
  const SessionId session = fabric.OpenSession();
  Link link(fabric, session);

  // Clients: share, upload once to each server, go offline.
  const Rng run_rng(config.seed);
  for (uint32_t j = 0; j < config.teachers; ++j) {
    Rng client_rng = run_rng.Split({kClientStream, sample_id, j});
    auto [to_s0, to_s1] =
        ClientShare(predictions[j].bits(), config.scale, ring, client_rng);
    fabric.SendOneWay(Message::Make(session, Phase::kUpload, StepTag::kClientShares,
                                    ClientRole(j), kServer0, to_s0, ring.bits()));
    fabric.SendOneWay(Message::Make(session, Phase::kUpload, StepTag::kClientShares,
                                    ClientRole(j), kServer1, to_s1, ring.bits()));
  }

  // Each server sums the share vectors it received.
  SharedVec votes(ring, config.classes);
  for (RoleId s : {kServer0, kServer1}) {
    const std::vector<Message> inbox = fabric.TakeInbox(session, s);
    if (inbox.size() != config.teachers) throw ProtocolError("missing client upload");
    for (const Message& m : inbox) {
      const std::vector<uint64_t> share = m.Values();
      if (share.size() != config.classes) throw ProtocolError("malformed client upload");
      for (uint32_t i = 0; i < config.classes; ++i) {
        votes.v[s][i] = ring.Add(votes.v[s][i], share[i]);
      }
    }
  }

  const SampleNoise noise = DrawSampleNoise(config, sample_id);
  SampleResult result;

  link.set_phase(Phase::kPhase1);
  const SharedVec n_star = Phase1HighestVote(link, triples, votes, config.strategy);

  link.set_phase(Phase::kPhase2);
  const uint64_t threshold_scaled =
      ring.Mul(config.ThresholdVotes(), ring.Reduce(config.scale));
  result.threshold_bit = Phase2ThresholdCheck(link, triples, n_star, threshold_scaled,
                                              noise.threshold, audit, sample_id);

  if (result.threshold_bit == 0) {
    link.set_phase(Phase::kPhase3);
    const SharedVec index =
        Phase3ConsensusLabel(link, triples, votes, noise.per_class, config.strategy,
                             config.IndexBits(), result.threshold_bit);

    // Delivery: only the requester ever adds the two index shares.
    const unsigned b = index.ring.bits();
    fabric.SendOneWay(Message::Make(session, Phase::kDelivery, StepTag::kLabelShares,
                                    kServer0, kRequester, index.v[0], b));
    fabric.SendOneWay(Message::Make(session, Phase::kDelivery, StepTag::kLabelShares,
                                    kServer1, kRequester, index.v[1], b));
    const std::vector<Message> inbox = fabric.TakeInbox(session, kRequester);
    if (inbox.size() != 2) throw ProtocolError("requester expected two label shares");
    const Share s0{RingElement(inbox[0].Values().at(0), index.ring), Party::kS0};
    const Share s1{RingElement(inbox[1].Values().at(0), index.ring), Party::kS1};
    const uint64_t label = Reconstruct(s0, s1).value();
    if (audit) audit->Record(sample_id, RevealAudit::Observer::kRequester, "label", label);
    if (label >= config.classes) throw ProtocolError("reconstructed label out of range");
    result.outcome = AggregationOutcome::Consensus(static_cast<uint32_t>(label));
  }

  result.stats = fabric.SnapshotStats(session);
  fabric.CloseSession(session);
  const TripleBudget after = triples[0].ConsumedBudget();
  result.triples_used = {after.z2 - before.z2, after.z2l - before.z2l,
                         after.cross - before.cross};
  return result;
}

SampleResult RunSample(const ProtocolConfig& config, uint64_t sample_id,
                       std::span<const PredictionVector> predictions, Fabric& fabric,
                       RevealAudit* audit) {
  config.Validate();
  Rng dealer = Rng(config.seed).Split({kDealerStream, sample_id});
  TriplePair triples = DealTriples(CountTriples(config.ring_bits, config.classes, 1),
                                   config.ring_bits, dealer);
  return RunSampleWith(config, sample_id, predictions, fabric, triples, audit);
}

AggregationOutcome PlaintextOracle(const ProtocolConfig& config,
                                   std::span<const PredictionVector> predictions,
                                   const SampleNoise& noise) {
  const int64_t scale = static_cast<int64_t>(config.scale);
  std::vector<int64_t> counts(config.classes, 0);
  for (const PredictionVector& y : predictions) {
    if (y.size() != config.classes) throw UsageError("prediction has wrong class count");
    counts[y.label()] += scale;
  }
  const int64_t n_star = *std::max_element(counts.begin(), counts.end());
  const int64_t threshold = static_cast<int64_t>(config.ThresholdVotes()) * scale;
  if (n_star + noise.threshold < threshold) return AggregationOutcome::NoConsensus();

  uint32_t best = 0;
  for (uint32_t i = 1; i < config.classes; ++i) {
    if (counts[i] + noise.per_class[i] > counts[best] + noise.per_class[best]) best = i;
  }
  return AggregationOutcome::Consensus(best);
}

}  // namespace sedml
