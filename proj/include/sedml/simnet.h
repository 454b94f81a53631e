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

// In-process message fabric between the two server engines. Every byte the
// servers exchange passes through here, so rounds, messages and payload bytes
// are metered exactly.

#ifndef SEDML_SIMNET_H_
#define SEDML_SIMNET_H_

#include <array>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sedml {

enum class Phase : uint8_t {
  kUpload = 0,  // clients -> servers, one-way
  kPhase1 = 1,  // highest vote
  kPhase2 = 2,  // threshold check
  kPhase3 = 3,  // consensus label
  kDelivery = 4,  // servers -> requester, one-way
};
inline constexpr size_t kNumPhases = 5;

enum class StepTag : uint16_t {
  kClientShares = 1,
  kAndGates = 2,      // step-3 G_j products
  kCarryLevel = 3,    // one level of the carry tree
  kCrossMul = 4,      // single-party-input products (B2A, fused select)
  kBeaverMul = 5,     // generic Z_{2^l} Beaver multiplication
  kReveal = 6,
  kLabelShares = 7,
};

using SessionId = uint64_t;
using RoleId = uint32_t;

inline constexpr RoleId kServer0 = 0;
inline constexpr RoleId kServer1 = 1;
inline constexpr RoleId kRequester = 2;
inline constexpr RoleId kFirstClient = 16;
constexpr RoleId ClientRole(uint32_t j) { return kFirstClient + j; }
constexpr bool IsClient(RoleId r) { return r >= kFirstClient; }

// Payload size of `count` elements of `width_bits` each. One-bit elements are
// packed eight per byte; wider elements take ceil(width/8) bytes each.
size_t PayloadBytes(size_t count, unsigned width_bits);

// Little-endian packing of ring elements (bit-packed, LSB first, for width 1).
std::vector<uint8_t> PackElements(std::span<const uint64_t> values,
                                  unsigned width_bits);
std::vector<uint64_t> UnpackElements(std::span<const uint8_t> payload,
                                     size_t count, unsigned width_bits);

struct Message {
  SessionId session_id = 0;
  Phase phase = Phase::kPhase1;
  StepTag step = StepTag::kBeaverMul;
  uint32_t round = 0;  // assigned by the fabric for server exchanges
  RoleId from = kServer0;
  RoleId to = kServer1;
  uint32_t count = 0;
  uint8_t width_bits = 64;
  std::vector<uint8_t> payload;

  static Message Make(SessionId session, Phase phase, StepTag step,
                      RoleId from, RoleId to, std::span<const uint64_t> values,
                      unsigned width_bits);
  std::vector<uint64_t> Values() const;
  bool operator==(const Message&) const = default;
};

struct PhaseCounters {
  uint64_t rounds = 0;
  uint64_t messages = 0;
  uint64_t bytes = 0;
  bool operator==(const PhaseCounters&) const = default;
};

struct CommStats {
  std::array<PhaseCounters, kNumPhases> phase{};
  // Server-to-server bytes, per phase, indexed [phase][server].
  std::array<std::array<uint64_t, 2>, kNumPhases> sent{};
  std::array<std::array<uint64_t, 2>, kNumPhases> received{};

  const PhaseCounters& operator[](Phase p) const {
    return phase[static_cast<size_t>(p)];
  }
  uint64_t TotalRounds() const;
  uint64_t TotalBytes() const;
  CommStats& operator+=(const CommStats& other);
  bool operator==(const CommStats&) const = default;
};

// Framed binary trace: u32 LE length prefix, header fields, payload.
void WriteTraceRecord(std::ostream& out, const Message& m);
std::optional<Message> ReadTraceRecord(std::istream& in);

class Fabric {
 public:
  // `stall_budget` bounds how many unanswered polls (or 1 ms waits) a party
  // may spend on a round before the fabric reports a deadlock.
  explicit Fabric(size_t stall_budget = 1000);
  Fabric(const Fabric&) = delete;
  Fabric& operator=(const Fabric&) = delete;
  ~Fabric();

  SessionId OpenSession();
  void CloseSession(SessionId id);

  // Simultaneous broadcast: server 0 sends `from0`, server 1 sends `from1`;
  // returns {what server 0 received, what server 1 received}.
  std::array<Message, 2> Exchange(Message from0, Message from1);

  // Split form of Exchange for engines on separate threads. Submit is
  // non-blocking; Await blocks until the peer's batch for the same round
  // arrived and throws DeadlockError when the stall budget runs out.
  void Submit(Message m);
  Message Await(SessionId id, RoleId receiver);
  // Non-blocking; each empty poll counts against the stall budget.
  std::optional<Message> Poll(SessionId id, RoleId receiver);

  // Client uploads and requester deliveries; metered as messages and bytes
  // but never as rounds.
  void SendOneWay(Message m);
  std::vector<Message> TakeInbox(SessionId id, RoleId receiver);

  CommStats SnapshotStats(SessionId id) const;

  void EnableTrace(bool on);
  std::vector<Message> Trace() const;
  void DumpTrace(std::ostream& out) const;

 private:
  struct Channel;
  Channel& Get(SessionId id) const;
  void Record(const Message& m);

  size_t stall_budget_;
  mutable std::mutex mu_;
  std::map<SessionId, std::unique_ptr<Channel>> channels_;
  SessionId next_id_ = 1;
  bool trace_on_ = false;
  std::vector<Message> trace_;
};

// One protocol session between the two servers, as seen by the joint
// simulation: a fabric channel plus the phase currently being metered.
class Link {
 public:
  Link(Fabric& fabric, SessionId id) : fabric_(&fabric), id_(id) {}

  Fabric& fabric() const { return *fabric_; }
  SessionId id() const { return id_; }
  Phase phase() const { return phase_; }
  void set_phase(Phase p) { phase_ = p; }

  // One round: server s broadcasts sent[s] (elements of `width_bits`), and
  // the result holds what each server received from its peer.
  std::array<std::vector<uint64_t>, 2> Exchange(
      StepTag step, unsigned width_bits,
      const std::array<std::vector<uint64_t>, 2>& sent) const;

 private:
  Fabric* fabric_;
  SessionId id_;
  Phase phase_ = Phase::kPhase1;
};

}  // namespace sedml

#endif  // SEDML_SIMNET_H_
