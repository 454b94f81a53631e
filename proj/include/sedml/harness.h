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

// Experiment driver: synthetic teachers, per-sample protocol runs checked
// against the plaintext oracle, reports, scaling benchmarks and the CLI.

#ifndef SEDML_HARNESS_H_
#define SEDML_HARNESS_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sedml/privacy.h"
#include "sedml/protocol.h"
#include "sedml/simnet.h"

namespace sedml {

struct Workload {
  uint32_t teachers = 0;
  uint32_t classes = 0;
  double error_rate = 0.0;
  std::vector<uint32_t> true_labels;
  // predictions[sample][teacher]
  std::vector<std::vector<PredictionVector>> predictions;

  size_t samples() const { return true_labels.size(); }
};

// Each teacher independently votes the true label with probability
// 1 - error_rate, otherwise a uniformly chosen wrong class.
Workload GenerateWorkload(const ProtocolConfig& config, uint64_t samples,
                          double error_rate, uint64_t seed);

struct SampleRecord {
  uint64_t sample_id = 0;
  uint32_t true_label = 0;
  AggregationOutcome outcome = AggregationOutcome::NoConsensus();
  AggregationOutcome oracle = AggregationOutcome::NoConsensus();
  std::array<uint64_t, 3> phase_rounds{};
  std::array<uint64_t, 3> phase_bytes{};
};

struct ExperimentReport {
  ProtocolConfig config;
  double error_rate = 0.0;
  std::vector<SampleRecord> records;  // sorted by sample_id
  uint64_t answered = 0;
  double answered_fraction = 0.0;
  // Over consensus samples only; empty when nothing was answered.
  std::optional<double> label_accuracy;
  std::optional<double> oracle_label_accuracy;
  uint64_t oracle_mismatches = 0;
  CommStats total;
  DpGuarantee privacy;  // composed over the answered samples
  bool valid = true;
  std::string error;
};

struct ExperimentOptions {
  double delta = 1e-5;
  Fabric* fabric = nullptr;     // defaults to a private fabric
  RevealAudit* audit = nullptr;
};

// Runs every sample of the workload. A protocol error stops the run and
// returns the partial report with valid = false.
ExperimentReport RunExperiment(const ProtocolConfig& config, const Workload& workload,
                               const ExperimentOptions& options = {});

std::string ReportToJson(const ExperimentReport& report);
std::string ReportToCsv(const ExperimentReport& report);
// {sample_id, outcome, label?, phase_rounds, phase_bytes}
std::string OutcomeJsonLine(const SampleRecord& record);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

struct BenchRow {
  uint32_t classes = 0;
  uint64_t samples = 0;
  uint64_t answered = 0;
  uint64_t rounds = 0;
  uint64_t bytes = 0;
  std::array<uint64_t, 3> phase_rounds{};
  std::array<uint64_t, 3> phase_bytes{};
};

// Zero-noise, error-free workloads (every sample reaches consensus) over the
// cartesian product of class counts and sample counts.
std::vector<BenchRow> RunBench(const ProtocolConfig& base,
                               const std::vector<uint32_t>& classes,
                               const std::vector<uint64_t>& samples);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Exhaustive and randomized gadget checks plus oracle equivalence of the
// full protocol, sized to run in seconds.
std::vector<SelftestCheck> RunSelftest(uint64_t seed);

// "a", "a..b" or "a..b:step"; step defaults to a.
std::vector<uint64_t> ParseRange(const std::string& text);

// Exit codes: 0 ok, 2 usage, 3 protocol failure, 4 infeasible accountant
// target.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sedml

#endif  // SEDML_HARNESS_H_
