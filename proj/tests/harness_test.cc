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


#include "sedml/harness.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "sedml/errors.h"

namespace sedml {
namespace {

using nlohmann::json;

ProtocolConfig Config(uint32_t k, uint32_t n) {
  ProtocolConfig c;
  c.teachers = k;
  c.classes = n;
  return c;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sedml");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(WorkloadTest, PerfectAndAlwaysWrongTeachers) {
  const Workload perfect = GenerateWorkload(Config(25, 10), 50, 0.0, 1);
  for (size_t s = 0; s < perfect.samples(); ++s) {
    ASSERT_LT(perfect.true_labels[s], 10u);
    for (const PredictionVector& y : perfect.predictions[s]) {
      ASSERT_EQ(y.label(), perfect.true_labels[s]);
    }
  }
  const Workload wrong = GenerateWorkload(Config(25, 2), 50, 1.0, 1);
  for (size_t s = 0; s < wrong.samples(); ++s) {
    for (const PredictionVector& y : wrong.predictions[s]) {
      ASSERT_EQ(y.label(), 1 - wrong.true_labels[s]);
    }
  }
  EXPECT_THROW(GenerateWorkload(Config(5, 2), 1, 1.5, 0), UsageError);
}

TEST(WorkloadTest, CorrectVotesFollowBinomialMean) {
  const Workload w = GenerateWorkload(Config(250, 10), 100, 0.3, 77);
  double total = 0;
  for (size_t s = 0; s < w.samples(); ++s) {
    for (const PredictionVector& y : w.predictions[s]) total += y.label() == w.true_labels[s];
  }
  EXPECT_NEAR(total / 100.0, 250 * 0.7, 10.0);
}

TEST(WorkloadTest, Deterministic) {
  const Workload a = GenerateWorkload(Config(10, 4), 20, 0.4, 5);
  const Workload b = GenerateWorkload(Config(10, 4), 20, 0.4, 5);
  EXPECT_EQ(a.true_labels, b.true_labels);
  for (size_t s = 0; s < a.samples(); ++s) {
    for (size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(a.predictions[s][j].label(), b.predictions[s][j].label());
    }
  }
}

TEST(ExperimentTest, PerfectTeachers) {
  const ProtocolConfig c = Config(25, 10);
  const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 40, 0.0, 3));
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.answered, 40u);
  EXPECT_EQ(r.answered_fraction, 1.0);
  ASSERT_TRUE(r.label_accuracy.has_value());
  EXPECT_EQ(*r.label_accuracy, 1.0);
  EXPECT_EQ(r.oracle_mismatches, 0u);
  EXPECT_TRUE(std::isinf(r.privacy.epsilon));  // no noise, no privacy
}

TEST(ExperimentTest, EvenSplitNeverAnswers) {
  const ProtocolConfig c = Config(10, 2);
  Workload w;
  w.teachers = 10;
  w.classes = 2;
  for (int s = 0; s < 5; ++s) {
    w.true_labels.push_back(0);
    std::vector<PredictionVector> votes;
    for (uint32_t j = 0; j < 10; ++j) votes.push_back(PredictionVector::OneHot(2, j % 2));
    w.predictions.push_back(votes);
  }
  const ExperimentReport r = RunExperiment(c, w);
  EXPECT_EQ(r.answered_fraction, 0.0);
  EXPECT_FALSE(r.label_accuracy.has_value());
  EXPECT_EQ(r.privacy.epsilon, 0.0);
  EXPECT_EQ(json::parse(ReportToJson(r))["label_accuracy"], nullptr);
}

TEST(ExperimentTest, AnsweredFractionFallsWithThreshold) {
  double prev = 1.1;
  for (int t = 3; t <= 9; ++t) {
    ProtocolConfig c = Config(50, 10);
    c.threshold = t / 10.0;
    c.sigma1 = c.sigma2 = 4.0;
    c.seed = 12;
    const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 60, 0.4, 12));
    EXPECT_LE(r.answered_fraction, prev) << t;
    EXPECT_EQ(r.oracle_mismatches, 0u);
    if (r.label_accuracy) EXPECT_EQ(*r.label_accuracy, *r.oracle_label_accuracy);
    prev = r.answered_fraction;
  }
}

TEST(ExperimentTest, ReportsAreByteIdentical) {
  ProtocolConfig c = Config(20, 5);
  c.sigma1 = c.sigma2 = 2.0;
  c.seed = 44;
  const Workload w = GenerateWorkload(c, 15, 0.3, 44);
  EXPECT_EQ(ReportToJson(RunExperiment(c, w)), ReportToJson(RunExperiment(c, w)));
  EXPECT_EQ(ReportToCsv(RunExperiment(c, w)), ReportToCsv(RunExperiment(c, w)));
}

TEST(ExperimentTest, ReportShape) {
  ProtocolConfig c = Config(20, 3);
  c.sigma1 = c.sigma2 = 3.0;
  const ExperimentReport r = RunExperiment(c, GenerateWorkload(c, 8, 0.2, 1));
  const json j = json::parse(ReportToJson(r));
  EXPECT_EQ(j["samples"], 8);
  EXPECT_EQ(j["outcomes"].size(), 8u);
  for (size_t i = 0; i < 8; ++i) EXPECT_EQ(j["outcomes"][i]["sample_id"], i);
  EXPECT_GT(j["privacy"]["epsilon"].get<double>(), 0.0);
  const std::string csv = ReportToCsv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  const json line = json::parse(OutcomeJsonLine(r.records[0]));
  EXPECT_EQ(line["sample_id"], 0);
  EXPECT_EQ(line["phase_rounds"].size(), 3u);
}

TEST(FitLineTest, ExactAndErrors) {
  const LinearFit f = FitLine({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  EXPECT_LT(FitLine({1, 2, 3, 4}, {1, 4, 9, 16}).r2, 1.0);
  EXPECT_THROW(FitLine({1}, {1}), UsageError);
  EXPECT_THROW(FitLine({2, 2}, {1, 3}), UsageError);
}

TEST(BenchTest, RoundsPerSampleAreAffineInClasses) {
  const std::vector<BenchRow> rows = RunBench(Config(10, 2), {2, 4, 6, 8}, {3});
  ASSERT_EQ(rows.size(), 4u);
  for (const BenchRow& r : rows) {
    EXPECT_EQ(r.answered, 3u);
    // Two sweeps of N - 1 comparisons at 8 rounds, plus 8 + 1 in the check.
    EXPECT_EQ(r.rounds, 3 * (2 * (r.classes - 1) * 8 + 9));
  }
}

TEST(ParseRangeTest, Forms) {
  EXPECT_EQ(ParseRange("7"), (std::vector<uint64_t>{7}));
  EXPECT_EQ(ParseRange("10..50"), (std::vector<uint64_t>{10, 20, 30, 40, 50}));
  EXPECT_EQ(ParseRange("1..7:3"), (std::vector<uint64_t>{1, 4, 7}));
  EXPECT_THROW(ParseRange("5..2"), UsageError);
  EXPECT_THROW(ParseRange("x"), UsageError);
  EXPECT_THROW(ParseRange("1..5:0"), UsageError);
}

TEST(CliTest, SelftestPasses) {
  const CliResult r = Cli({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliTest, AccountantFixedPoint) {
  const CliResult r =
      Cli({"accountant", "--sigma1", "3", "--sigma2", "1.4142136", "--delta", "0.3678794"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["epsilon"].get<double>(), 3.0, 1e-5);
}

TEST(CliTest, AccountantSolveAndInfeasible) {
  CliResult r = Cli({"accountant", "--epsilon", "5", "--ratio", "2", "--queries", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["epsilon"].get<double>(), 5.0, 1e-4);
  EXPECT_NEAR(j["sigma1"].get<double>() / j["sigma2"].get<double>(), 2.0, 1e-9);
  r = Cli({"accountant", "--epsilon", "0.001", "--ratio", "1"});
  EXPECT_EQ(r.code, 4);
  EXPECT_FALSE(r.err.empty());
  r = Cli({"accountant", "--sigma1", "0", "--sigma2", "1"});
  EXPECT_EQ(json::parse(r.out)["epsilon"], nullptr);
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"run", "--nope"}).code, 2);
  EXPECT_EQ(Cli({"run", "--strategy", "bubble"}).code, 2);
  EXPECT_EQ(Cli({"run", "--output", "xml"}).code, 2);
  EXPECT_EQ(Cli({"run", "--classes", "1", "--samples", "1"}).code, 2);
  EXPECT_EQ(Cli({"run", "--ring-bits", "32", "--samples", "1"}).code, 2);
  EXPECT_EQ(Cli({"run", "--classes", "2..4", "--samples", "1"}).code, 2);
  const CliResult r = Cli({"run", "--error-rate", "2", "--samples", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error rate"), std::string::npos);
}

TEST(CliTest, RunWritesReportTraceAndOutcomes) {
  const std::string trace = ::testing::TempDir() + "sedml_cli.trace";
  const std::string lines = ::testing::TempDir() + "sedml_cli.jsonl";
  const std::vector<std::string> args = {
      "run",      "--teachers", "20",   "--classes", "4",       "--samples", "6",
      "--sigma1", "2",          "--sigma2", "2",     "--seed",    "9",       "--trace",
      trace,      "--outcomes", lines};
  const CliResult a = Cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(Cli(args).out, a.out);
  const json j = json::parse(a.out);
  EXPECT_EQ(j["config"]["teachers"], 20);
  EXPECT_EQ(j["oracle_mismatches"], 0);
  std::ifstream tf(trace, std::ios::binary);
  size_t records = 0;
  while (ReadTraceRecord(tf)) ++records;
  EXPECT_GT(records, 40u);  // at least the client uploads
  std::ifstream lf(lines);
  std::string line;
  size_t n = 0;
  while (std::getline(lf, line)) {
    EXPECT_EQ(json::parse(line)["sample_id"], n);
    ++n;
  }
  EXPECT_EQ(n, 6u);
  std::remove(trace.c_str());
  std::remove(lines.c_str());

  const CliResult csv = Cli({"run", "--teachers", "5", "--classes", "2", "--samples", "3",
                             "--output", "csv"});
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("sample_id,", 0), 0u);
}

TEST(CliTest, BenchLinearInClasses) {
  const CliResult r = Cli({"bench", "--teachers", "10", "--classes", "10..50", "--samples", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_GE(j["rounds_vs_classes"]["r2"].get<double>(), 0.999);
  // Two sweeps of (N - 1) comparisons at log2(64) + 2 rounds each.
  EXPECT_DOUBLE_EQ(j["rounds_vs_classes"]["slope"].get<double>(), 2 * 2 * 8.0);
}

}  // namespace
}  // namespace sedml
