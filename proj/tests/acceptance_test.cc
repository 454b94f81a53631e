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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sedml/gadgets.h"
#include "sedml/harness.h"
#include "sedml/privacy.h"
#include "sedml/protocol.h"
#include "sedml/rng.h"
#include "sedml/simnet.h"
#include "sedml/triples.h"

namespace sedml {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

constexpr double kRatioLow = 8.5;
constexpr double kRatioHigh = 9.5;
constexpr double kMinR2 = 0.999;
constexpr double kGridTolerance = 0.01;   // relative, against the closed form
constexpr double kSolveTolerance = 1e-4;  // absolute epsilon
constexpr double kFixedPointTolerance = 1e-9;

std::string Fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Plaintext signed comparison over one batch of shared pairs.
uint64_t ScmpMismatches(unsigned bits, const std::vector<int64_t>& a,
                        const std::vector<int64_t>& b, Rng& rng) {
  const Ring r(bits);
  std::vector<uint64_t> ua, ub;
  for (size_t i = 0; i < a.size(); ++i) {
    ua.push_back(r.FromSigned(a[i]));
    ub.push_back(r.FromSigned(b[i]));
  }
  TripleBudget need;
  need.z2 = MsbZ2Triples(bits) * a.size();
  need.cross = a.size();
  TriplePair t = DealTriples(need, bits, rng);
  Fabric f;
  Link link(f, f.OpenSession());
  const auto e =
      ReconstructAll(Scmp(link, t, ShareAll(r, ua, rng), ShareAll(r, ub, rng)));
  uint64_t bad = 0;
  for (size_t i = 0; i < a.size(); ++i) bad += e[i] != (a[i] < b[i] ? 1u : 0u);
  return bad;
}

Verdict OracleEquivalence() {
  Rng rng(101);
  Fabric fabric;
  uint64_t runs = 0, bad = 0, answered = 0;
  for (uint32_t k : {10u, 50u, 250u}) {
    for (uint32_t n : {2u, 10u}) {
      for (double s1 : {0.0, 1.0, 10.0}) {
        for (double s2 : {0.0, 1.0, 10.0}) {
          for (int rep = 0; rep < 19; ++rep) {
            ProtocolConfig c;
            c.teachers = k;
            c.classes = n;
            c.sigma1 = s1;
            c.sigma2 = s2;
            c.seed = rng.NextU64();
            c.threshold = 0.3 + 0.6 * rng.Uniform();
            c.strategy = rep % 2 ? MaxStrategy::kTournament : MaxStrategy::kSequential;
            const Workload w = GenerateWorkload(c, 1, 0.8 * rng.Uniform(), c.seed);
            const auto got = RunSample(c, 0, w.predictions[0], fabric).outcome;
            bad += !(got == PlaintextOracle(c, w.predictions[0], DrawSampleNoise(c, 0)));
            answered += got.consensus();
            ++runs;
          }
        }
      }
    }
  }
  return {runs >= 1000 && bad == 0,
          std::to_string(runs) + " instances, " + std::to_string(bad) + " mismatches, " +
              std::to_string(answered) + " answered"};
}

Verdict ExhaustiveComparison() {
  Rng rng(202);
  std::vector<int64_t> a, b;
  for (int x = -128; x < 128; ++x) {
    for (int y = -128; y < 128; ++y) {
      if (std::abs(x - y) < 128) {
        a.push_back(x);
        b.push_back(y);
      }
    }
  }
  uint64_t bad = ScmpMismatches(8, a, b, rng);
  std::string detail = "l=8: " + std::to_string(a.size()) + " safe pairs";
  for (unsigned bits : {32u, 64u}) {
    const int64_t q = int64_t{1} << (bits - 2);
    std::vector<int64_t> x(100000), y(100000);
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = static_cast<int64_t>(rng.Below(2 * q)) - q;
      y[i] = static_cast<int64_t>(rng.Below(2 * q)) - q;
    }
    bad += ScmpMismatches(bits, x, y, rng);
    detail += ", l=" + std::to_string(bits) + ": 100000 random";
  }
  return {bad == 0, detail + ", " + std::to_string(bad) + " mismatches"};
}

Verdict RoundExactness() {
  std::map<unsigned, uint64_t> rounds;
  for (unsigned bits : {32u, 64u}) {
    Rng rng(bits);
    std::vector<int64_t> a = {-3}, b = {5};
    TripleBudget need;
    need.z2 = MsbZ2Triples(bits);
    need.cross = 1;
    TriplePair t = DealTriples(need, bits, rng);
    Fabric f;
    Link link(f, f.OpenSession());
    const Ring r(bits);
    Scmp(link, t, ShareAll(r, {r.FromSigned(-3)}, rng), ShareAll(r, {5}, rng));
    rounds[bits] = f.SnapshotStats(link.id())[Phase::kPhase1].rounds;
  }
  return {rounds[64] == 8 && rounds[32] == 7,
          "l=64: " + std::to_string(rounds[64]) + " rounds, l=32: " +
              std::to_string(rounds[32]) + " rounds"};
}

Verdict CommunicationRatio() {
  ProtocolConfig c;  // K = 250, N = 10, l = 64
  c.seed = 4;
  const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 20, 0.1, 4));
  double lo = 1e9, hi = 0;
  bool p3_ok = true;
  uint64_t answered = 0;
  for (const SampleRecord& rec : r.records) {
    if (!rec.outcome.consensus()) continue;
    ++answered;
    const double ratio = static_cast<double>(rec.phase_bytes[0]) / rec.phase_bytes[1];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    p3_ok = p3_ok && rec.phase_bytes[2] <= rec.phase_bytes[0];
  }
  const auto& first = r.records.front();
  return {answered > 0 && lo >= kRatioLow && hi <= kRatioHigh && p3_ok,
          Fmt("phase1/phase2 bytes in [%.3f, %.3f]", lo, hi) +
              " over " + std::to_string(answered) + " answered samples; phase bytes " +
              std::to_string(first.phase_bytes[0]) + "/" + std::to_string(first.phase_bytes[1]) +
              "/" + std::to_string(first.phase_bytes[2])};
}

Verdict LinearScaling() {
  ProtocolConfig base;
  std::vector<double> xs, ys;
  for (const BenchRow& row : RunBench(base, {10}, {1000, 2000, 3000, 4000, 5000})) {
    if (row.answered != row.samples) return {false, "a zero-noise sample was not answered"};
    xs.push_back(static_cast<double>(row.samples));
    ys.push_back(static_cast<double>(row.rounds));
  }
  const LinearFit by_samples = FitLine(xs, ys);
  xs.clear();
  ys.clear();
  for (const BenchRow& row : RunBench(base, {10, 20, 30, 40, 50}, {100})) {
    xs.push_back(row.classes);
    ys.push_back(static_cast<double>(row.rounds));
  }
  const LinearFit by_classes = FitLine(xs, ys);
  return {by_samples.r2 >= kMinR2 && by_classes.r2 >= kMinR2,
          Fmt("samples: R2=%.6f slope=%.1f; ", by_samples.r2, by_samples.slope) +
              Fmt("classes: R2=%.6f slope=%.1f", by_classes.r2, by_classes.slope)};
}

Verdict AccountantFixedPoint() {
  const double closed = ClosedFormEpsilon(3.0, std::sqrt(2.0), std::exp(-1.0));
  bool ok = std::abs(closed - 3.0) < kFixedPointTolerance;
  double worst = 0;
  for (double s1 : {1.0, 2.0, 4.0, 8.0}) {
    for (double s2 : {1.0, 2.0, 4.0, 8.0}) {
      for (double delta : {1e-5, 1e-6}) {
        const double grid = EvaluateProtocol(s1, s2, delta, 1).epsilon;
        const double cf = ClosedFormEpsilon(s1, s2, delta);
        worst = std::max(worst, std::abs(grid - cf) / cf);
      }
    }
  }
  ok = ok && worst <= kGridTolerance;
  Rng rng(606);
  double worst_solve = 0;
  for (int i = 0; i < 100; ++i) {
    const double target = 0.5 + 15.0 * rng.Uniform();
    const double ratio = 0.5 + 3.0 * rng.Uniform();
    const uint64_t queries = 1 + rng.Below(1000);
    const NoiseSolution s = SolveNoiseForEpsilon(target, 1e-5, ratio, queries);
    worst_solve = std::max(
        worst_solve,
        std::abs(EvaluateProtocol(s.sigma1, s.sigma2, 1e-5, queries).epsilon - target));
  }
  ok = ok && worst_solve < kSolveTolerance;
  return {ok, Fmt("closed form %.9f, worst grid gap %.4f%%, worst solve error %.2e", closed,
                  100 * worst, worst_solve)};
}

Verdict LeakageAudit() {
  ProtocolConfig c;
  c.teachers = 50;
  c.sigma1 = c.sigma2 = 3.0;
  c.seed = 7;
  Fabric fabric;
  fabric.EnableTrace(true);
  RevealAudit audit;
  ExperimentOptions opt;
  opt.fabric = &fabric;
  opt.audit = &audit;
  const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 200, 0.4, 7), opt);
  bool ok = r.valid;
  for (const SampleRecord& rec : r.records) {
    ok = ok && audit.Count(rec.sample_id, RevealAudit::Observer::kServers) == 1;
    ok = ok && audit.Count(rec.sample_id, RevealAudit::Observer::kRequester) ==
                   (rec.outcome.consensus() ? 1u : 0u);
  }
  for (const auto& e : audit.events()) {
    ok = ok && (e.observer == RevealAudit::Observer::kServers ? e.what == "threshold_bit"
                                                               : e.what == "label");
  }
  uint64_t reveal_msgs = 0, label_msgs = 0;
  for (const Message& m : fabric.Trace()) {
    if (m.step == StepTag::kReveal) {
      ++reveal_msgs;
      ok = ok && m.phase == Phase::kPhase2;
    }
    if (m.step == StepTag::kLabelShares) {
      ++label_msgs;
      ok = ok && m.to == kRequester;
    }
  }
  ok = ok && reveal_msgs == 2 * r.records.size() && label_msgs == 2 * r.answered;
  return {ok, std::to_string(r.records.size()) + " samples, " + std::to_string(reveal_msgs / 2) +
                  " server reveals, " + std::to_string(r.answered) +
                  " labels opened at the requester only"};
}

Verdict PerfectTeachers() {
  ProtocolConfig c;  // K = 250, N = 10, T = 0.6, zero noise
  const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 1000, 0.0, 8));
  const bool ok = r.valid && r.label_accuracy && *r.label_accuracy == 1.0 &&
                  r.answered_fraction == 1.0;
  return {ok, Fmt("label_accuracy=%.6f answered_fraction=%.6f",
                  r.label_accuracy.value_or(-1.0), r.answered_fraction)};
}

}  // namespace
}  // namespace sedml

int main() {
  using sedml::Verdict;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", sedml::OracleEquivalence},
      {"exhaustive comparison", sedml::ExhaustiveComparison},
      {"round exactness", sedml::RoundExactness},
      {"communication ratio", sedml::CommunicationRatio},
      {"linear scaling", sedml::LinearScaling},
      {"accountant fixed point", sedml::AccountantFixedPoint},
      {"leakage audit", sedml::LeakageAudit},
      {"perfect teachers", sedml::PerfectTeachers},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
