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

// Two-server private label aggregation. Clients secret-share one-hot votes;
// the servers find the highest count, compare its noisy value against the
// threshold (revealing only that bit), and on consensus compute the shared
// index of the noisy argmax, which only the requester reconstructs.

#ifndef SEDML_PROTOCOL_H_
#define SEDML_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sedml/ring.h"
#include "sedml/rng.h"
#include "sedml/simnet.h"
#include "sedml/triples.h"

namespace sedml {

enum class MaxStrategy { kSequential, kTournament };

std::string ToString(MaxStrategy s);
MaxStrategy ParseMaxStrategy(const std::string& s);

struct ProtocolConfig {
  uint32_t teachers = 250;  // K
  uint32_t classes = 10;    // N
  double threshold = 0.6;   // T, fraction of K
  double sigma1 = 0.0;      // threshold-check noise
  double sigma2 = 0.0;      // argmax noise
  unsigned ring_bits = 64;
  uint64_t scale = 10'000'000;
  uint64_t seed = 0;
  MaxStrategy strategy = MaxStrategy::kSequential;

  // Throws UsageError on invalid parameters or when the widest packed value
  // could leave the signed-safe comparison range.
  void Validate() const;

  Ring ring() const { return Ring(ring_bits); }
  // ceil(T * K) in votes.
  uint64_t ThresholdVotes() const;
  // Bits reserved below the noisy counts for the class index in phase 3.
  unsigned IndexBits() const;
};

class PredictionVector {
 public:
  // Throws UsageError unless exactly one entry is 1 and the rest 0.
  explicit PredictionVector(std::vector<uint8_t> bits);
  static PredictionVector OneHot(uint32_t classes, uint32_t label);

  uint32_t size() const { return static_cast<uint32_t>(bits_.size()); }
  uint32_t label() const { return label_; }
  const std::vector<uint8_t>& bits() const { return bits_; }

 private:
  std::vector<uint8_t> bits_;
  uint32_t label_ = 0;
};

class AggregationOutcome {
 public:
  static AggregationOutcome Consensus(uint32_t label) {
    return AggregationOutcome(label);
  }
  static AggregationOutcome NoConsensus() { return AggregationOutcome(); }

  bool consensus() const { return label_.has_value(); }
  // Throws UsageError for NoConsensus.
  uint32_t label() const;
  std::string ToString() const;
  bool operator==(const AggregationOutcome&) const = default;

 private:
  AggregationOutcome() = default;
  explicit AggregationOutcome(uint32_t l) : label_(l) {}
  std::optional<uint32_t> label_;
};

// Fixed-point noise values of one sample, drawn from the run seed so the
// secure path and the plaintext oracle see identical perturbations.
struct SampleNoise {
  int64_t threshold = 0;           // encoded g for the threshold check
  std::vector<int64_t> per_class;  // encoded g_i for the noisy argmax
};

SampleNoise DrawSampleNoise(const ProtocolConfig& config, uint64_t sample_id);

// Records every value opened in plaintext during a run, with its observers.
// Beaver openings are uniformly masked and are not plaintext reveals.
class RevealAudit {
 public:
  enum class Observer { kServers, kRequester };
  struct Event {
    uint64_t sample = 0;
    Observer observer = Observer::kServers;
    std::string what;
    uint64_t value = 0;
  };

  void Record(uint64_t sample, Observer observer, std::string what, uint64_t value);
  const std::vector<Event>& events() const { return events_; }
  size_t Count(uint64_t sample, Observer observer) const;
  void Clear() { events_.clear(); }

 private:
  std::vector<Event> events_;
};

// Element-wise shares of scale * y: S0 gets the mask r, S1 gets scale*y - r.
// Throws UsageError if y is not one-hot.
std::pair<std::vector<uint64_t>, std::vector<uint64_t>> ClientShare(
    const std::vector<uint8_t>& y, uint64_t scale, Ring ring, Rng& rng);

// Shared max of the vote vector. Sequential runs N-1 compare-selects in
// order; tournament pairs neighbours and batches each level into one pass.
SharedVec Phase1HighestVote(const Link& link, TriplePair& triples,
                            const SharedVec& votes, MaxStrategy strategy);

// S0 adds the encoded noise to its share of n*, both run the comparison
// against the public threshold, and the result bit t is opened to both
// servers (the only server-side reveal of a sample). Returns t:
// 1 means no consensus.
uint64_t Phase2ThresholdCheck(const Link& link, TriplePair& triples,
                              const SharedVec& n_star, uint64_t threshold_scaled,
                              int64_t noise, RevealAudit* audit, uint64_t sample);

// S0 adds g_i to each of its vote shares, then the servers run the same max
// search over m(i) * 2^b + (2^b - 1 - i), which orders by noisy count and
// breaks ties toward the lower index. The result is the index shared over
// Z_{2^b}, never opened to the servers. Throws UsageError when t == 1.
SharedVec Phase3ConsensusLabel(const Link& link, TriplePair& triples,
                               const SharedVec& votes,
                               std::span<const int64_t> noise,
                               MaxStrategy strategy, unsigned index_bits,
                               uint64_t t);

struct SampleResult {
  AggregationOutcome outcome = AggregationOutcome::NoConsensus();
  CommStats stats;
  uint64_t threshold_bit = 1;
  TripleBudget triples_used;
};

// End-to-end run of one sample over a fresh fabric session, with triples
// dealt for this sample from the run seed.
SampleResult RunSample(const ProtocolConfig& config, uint64_t sample_id,
                       std::span<const PredictionVector> predictions,
                       Fabric& fabric, RevealAudit* audit = nullptr);

// Same, with caller-supplied triple stores. Throws ProtocolError before any
// message is sent when the stores cannot cover a worst-case run.
SampleResult RunSampleWith(const ProtocolConfig& config, uint64_t sample_id,
                           std::span<const PredictionVector> predictions,
                           Fabric& fabric, TriplePair& triples,
                           RevealAudit* audit = nullptr);

// Plaintext reference with the same encoding, noise values and tie rules.
AggregationOutcome PlaintextOracle(const ProtocolConfig& config,
                                   std::span<const PredictionVector> predictions,
                                   const SampleNoise& noise);

}  // namespace sedml

#endif  // SEDML_PROTOCOL_H_
