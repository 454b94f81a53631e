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

#include "sedml/simnet.h"

#include <chrono>
#include <istream>
#include <ostream>

#include "sedml/errors.h"

namespace sedml {
namespace {

size_t ElementBytes(unsigned width_bits) { return (width_bits + 7) / 8; }

template <typename T>
void PutLe(std::vector<uint8_t>& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<uint8_t>(static_cast<uint64_t>(v) >> (8 * i)));
  }
}

template <typename T>
T GetLe(const uint8_t* p) {
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t{p[i]} << (8 * i);
  return static_cast<T>(v);
}

constexpr size_t kTraceHeaderBytes = 8 + 1 + 2 + 4 + 4 + 4 + 4 + 1;

}  // namespace

size_t PayloadBytes(size_t count, unsigned width_bits) {
  if (width_bits == 1) return (count + 7) / 8;
  return count * ElementBytes(width_bits);
}

std::vector<uint8_t> PackElements(std::span<const uint64_t> values,
                                  unsigned width_bits) {
  std::vector<uint8_t> out(PayloadBytes(values.size(), width_bits), 0);
  if (width_bits == 1) {
    for (size_t i = 0; i < values.size(); ++i) {
      out[i / 8] |= static_cast<uint8_t>((values[i] & 1) << (i % 8));
    }
    return out;
  }
  const size_t eb = ElementBytes(width_bits);
  for (size_t i = 0; i < values.size(); ++i) {
    for (size_t b = 0; b < eb; ++b) {
      out[i * eb + b] = static_cast<uint8_t>(values[i] >> (8 * b));
    }
  }
  return out;
}

std::vector<uint64_t> UnpackElements(std::span<const uint8_t> payload,
                                     size_t count, unsigned width_bits) {
  if (payload.size() != PayloadBytes(count, width_bits)) {
    throw UsageError("payload length does not match element count");
  }
  std::vector<uint64_t> out(count, 0);
  if (width_bits == 1) {
    for (size_t i = 0; i < count; ++i) out[i] = (payload[i / 8] >> (i % 8)) & 1;
    return out;
  }
  const size_t eb = ElementBytes(width_bits);
  const uint64_t mask =
      width_bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << width_bits) - 1;
  for (size_t i = 0; i < count; ++i) {
    uint64_t v = 0;
    for (size_t b = 0; b < eb; ++b) v |= uint64_t{payload[i * eb + b]} << (8 * b);
    out[i] = v & mask;
  }
  return out;
}

Message Message::Make(SessionId session, Phase phase, StepTag step,
                      RoleId from, RoleId to,
                      std::span<const uint64_t> values, unsigned width_bits) {
  Message m;
  m.session_id = session;
  m.phase = phase;
  m.step = step;
  m.from = from;
  m.to = to;
  m.count = static_cast<uint32_t>(values.size());
  m.width_bits = static_cast<uint8_t>(width_bits);
  m.payload = PackElements(values, width_bits);
  return m;
}

std::vector<uint64_t> Message::Values() const {
  return UnpackElements(payload, count, width_bits);
}

uint64_t CommStats::TotalRounds() const {
  uint64_t r = 0;
  for (const auto& p : phase) r += p.rounds;
  return r;
}

uint64_t CommStats::TotalBytes() const {
  uint64_t b = 0;
  for (const auto& p : phase) b += p.bytes;
  return b;
}

CommStats& CommStats::operator+=(const CommStats& other) {
  for (size_t i = 0; i < kNumPhases; ++i) {
    phase[i].rounds += other.phase[i].rounds;
    phase[i].messages += other.phase[i].messages;
    phase[i].bytes += other.phase[i].bytes;
    for (size_t s = 0; s < 2; ++s) {
      sent[i][s] += other.sent[i][s];
      received[i][s] += other.received[i][s];
    }
  }
  return *this;
}

void WriteTraceRecord(std::ostream& out, const Message& m) {
  std::vector<uint8_t> buf;
  buf.reserve(4 + kTraceHeaderBytes + m.payload.size());
  PutLe<uint32_t>(buf, static_cast<uint32_t>(kTraceHeaderBytes + m.payload.size()));
  PutLe<uint64_t>(buf, m.session_id);
  PutLe<uint8_t>(buf, static_cast<uint8_t>(m.phase));
  PutLe<uint16_t>(buf, static_cast<uint16_t>(m.step));
  PutLe<uint32_t>(buf, m.round);
  PutLe<uint32_t>(buf, m.from);
  PutLe<uint32_t>(buf, m.to);
  PutLe<uint32_t>(buf, m.count);
  PutLe<uint8_t>(buf, m.width_bits);
  buf.insert(buf.end(), m.payload.begin(), m.payload.end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

std::optional<Message> ReadTraceRecord(std::istream& in) {
  uint8_t len_buf[4];
  if (!in.read(reinterpret_cast<char*>(len_buf), 4)) return std::nullopt;
  const uint32_t len = GetLe<uint32_t>(len_buf);
  if (len < kTraceHeaderBytes) throw UsageError("truncated trace record");
  std::vector<uint8_t> buf(len);
  if (!in.read(reinterpret_cast<char*>(buf.data()), len)) {
    throw UsageError("truncated trace record");
  }
  const uint8_t* p = buf.data();
  Message m;
  m.session_id = GetLe<uint64_t>(p);
  p += 8;
  m.phase = static_cast<Phase>(*p++);
  m.step = static_cast<StepTag>(GetLe<uint16_t>(p));
  p += 2;
  m.round = GetLe<uint32_t>(p);
  p += 4;
  m.from = GetLe<uint32_t>(p);
  p += 4;
  m.to = GetLe<uint32_t>(p);
  p += 4;
  m.count = GetLe<uint32_t>(p);
  p += 4;
  m.width_bits = *p++;
  m.payload.assign(p, p + (buf.size() - (p - buf.data())));
  if (m.payload.size() != PayloadBytes(m.count, m.width_bits)) {
    throw UsageError("trace payload length does not match header");
  }
  return m;
}

struct Fabric::Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::array<std::optional<Message>, 2> pending;
  std::array<std::optional<Message>, 2> inbox;
  std::array<size_t, 2> stalls{};
  uint32_t round = 0;
  CommStats stats;
  std::map<RoleId, std::vector<Message>> oneway;
};

Fabric::Fabric(size_t stall_budget) : stall_budget_(stall_budget) {}
Fabric::~Fabric() = default;

SessionId Fabric::OpenSession() {
  std::lock_guard lock(mu_);
  const SessionId id = next_id_++;
  channels_.emplace(id, std::make_unique<Channel>());
  return id;
}

void Fabric::CloseSession(SessionId id) {
  std::lock_guard lock(mu_);
  channels_.erase(id);
}

Fabric::Channel& Fabric::Get(SessionId id) const {
  std::lock_guard lock(mu_);
  auto it = channels_.find(id);
  if (it == channels_.end()) {
    throw UsageError("unknown session " + std::to_string(id));
  }
  return *it->second;
}

void Fabric::Record(const Message& m) {
  std::lock_guard lock(mu_);
  if (trace_on_) trace_.push_back(m);
}

void Fabric::Submit(Message m) {
  if (m.from > kServer1 || m.to != 1 - m.from) {
    throw UsageError("round exchanges run between the two servers only");
  }
  if (m.phase == Phase::kUpload || m.phase == Phase::kDelivery) {
    throw UsageError("upload and delivery phases are one-way");
  }
  if (m.payload.size() != PayloadBytes(m.count, m.width_bits)) {
    throw UsageError("payload length does not match element count");
  }
  Channel& ch = Get(m.session_id);
  std::array<Message, 2> completed;
  {
    std::lock_guard lock(ch.mu);
    if (ch.pending[m.from]) {
      throw ProtocolError("server " + std::to_string(m.from) +
                          " submitted twice in round " +
                          std::to_string(ch.round));
    }
    if (ch.inbox[m.from]) {
      throw ProtocolError("server " + std::to_string(m.from) +
                          " submitted before reading the previous round");
    }
    m.round = ch.round;
    ch.pending[m.from] = std::move(m);
    if (!ch.pending[0] || !ch.pending[1]) return;

    if (ch.pending[0]->phase != ch.pending[1]->phase) {
      throw ProtocolError("servers disagree on the protocol phase");
    }
    const size_t ph = static_cast<size_t>(ch.pending[0]->phase);
    auto& counters = ch.stats.phase[ph];
    counters.rounds += 1;
    counters.messages += 2;
    for (RoleId s = 0; s < 2; ++s) {
      const uint64_t n = ch.pending[s]->payload.size();
      counters.bytes += n;
      ch.stats.sent[ph][s] += n;
      ch.stats.received[ph][1 - s] += n;
    }
    completed = {*ch.pending[0], *ch.pending[1]};
    ch.inbox[1] = std::move(ch.pending[0]);
    ch.inbox[0] = std::move(ch.pending[1]);
    ch.pending = {};
    ch.round += 1;
  }
  ch.cv.notify_all();
  Record(completed[0]);
  Record(completed[1]);
}

std::optional<Message> Fabric::Poll(SessionId id, RoleId receiver) {
  if (receiver > kServer1) throw UsageError("only servers poll rounds");
  Channel& ch = Get(id);
  std::lock_guard lock(ch.mu);
  if (ch.inbox[receiver]) {
    ch.stalls[receiver] = 0;
    std::optional<Message> out = std::move(ch.inbox[receiver]);
    ch.inbox[receiver].reset();
    return out;
  }
  if (++ch.stalls[receiver] > stall_budget_) {
    throw DeadlockError("server " + std::to_string(receiver) +
                        " is waiting on a round its peer never submitted");
  }
  return std::nullopt;
}

Message Fabric::Await(SessionId id, RoleId receiver) {
  if (receiver > kServer1) throw UsageError("only servers await rounds");
  Channel& ch = Get(id);
  std::unique_lock lock(ch.mu);
  while (!ch.inbox[receiver]) {
    if (ch.cv.wait_for(lock, std::chrono::milliseconds(1)) ==
            std::cv_status::timeout &&
        ++ch.stalls[receiver] > stall_budget_) {
      throw DeadlockError("server " + std::to_string(receiver) +
                          " is waiting on a round its peer never submitted");
    }
  }
  ch.stalls[receiver] = 0;
  Message out = std::move(*ch.inbox[receiver]);
  ch.inbox[receiver].reset();
  return out;
}

std::array<Message, 2> Fabric::Exchange(Message from0, Message from1) {
  if (from0.from != kServer0 || from1.from != kServer1) {
    throw UsageError("Exchange expects server 0's batch first");
  }
  const SessionId id = from0.session_id;
  if (from1.session_id != id) throw UsageError("batches from two sessions");
  Submit(std::move(from0));
  Submit(std::move(from1));
  return {Await(id, kServer0), Await(id, kServer1)};
}

void Fabric::SendOneWay(Message m) {
  const bool upload = m.phase == Phase::kUpload && IsClient(m.from) &&
                      m.to <= kServer1;
  const bool delivery = m.phase == Phase::kDelivery && m.from <= kServer1 &&
                        m.to == kRequester;
  if (!upload && !delivery) {
    throw UsageError("one-way messages go client->server or server->requester");
  }
  if (m.payload.size() != PayloadBytes(m.count, m.width_bits)) {
    throw UsageError("payload length does not match element count");
  }
  Channel& ch = Get(m.session_id);
  {
    std::lock_guard lock(ch.mu);
    auto& counters = ch.stats.phase[static_cast<size_t>(m.phase)];
    counters.messages += 1;
    counters.bytes += m.payload.size();
    ch.oneway[m.to].push_back(m);
  }
  Record(m);
}

std::vector<Message> Fabric::TakeInbox(SessionId id, RoleId receiver) {
  Channel& ch = Get(id);
  std::lock_guard lock(ch.mu);
  std::vector<Message> out = std::move(ch.oneway[receiver]);
  ch.oneway.erase(receiver);
  return out;
}

CommStats Fabric::SnapshotStats(SessionId id) const {
  Channel& ch = Get(id);
  std::lock_guard lock(ch.mu);
  return ch.stats;
}

void Fabric::EnableTrace(bool on) {
  std::lock_guard lock(mu_);
  trace_on_ = on;
}

std::vector<Message> Fabric::Trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

void Fabric::DumpTrace(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const Message& m : trace_) WriteTraceRecord(out, m);
}

std::array<std::vector<uint64_t>, 2> Link::Exchange(
    StepTag step, unsigned width_bits,
    const std::array<std::vector<uint64_t>, 2>& sent) const {
  auto delivered = fabric_->Exchange(
      Message::Make(id_, phase_, step, kServer0, kServer1, sent[0], width_bits),
      Message::Make(id_, phase_, step, kServer1, kServer0, sent[1],
                    width_bits));
  return {delivered[0].Values(), delivered[1].Values()};
}

}  // namespace sedml
