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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sedml/errors.h"
#include "sedml/gadgets.h"
#include "sedml/triples.h"

namespace sedml {
namespace {

using Json = nlohmann::ordered_json;

constexpr uint64_t kWorkloadStream = 0x776f726b6c6f6164ULL;

Json PhaseJson(const PhaseCounters& c) {
  return Json{{"rounds", c.rounds}, {"messages", c.messages}, {"bytes", c.bytes}};
}

Json NumberOrNull(double v) {
  if (!std::isfinite(v)) return Json(nullptr);
  return Json(v);
}

Json ConfigJson(const ProtocolConfig& c) {
  return Json{{"teachers", c.teachers},   {"classes", c.classes},
              {"threshold", c.threshold}, {"sigma1", c.sigma1},
              {"sigma2", c.sigma2},       {"ring_bits", c.ring_bits},
              {"scale", c.scale},         {"seed", c.seed},
              {"strategy", ToString(c.strategy)}};
}

Json RecordJson(const SampleRecord& r) {
  Json j;
  j["sample_id"] = r.sample_id;
  j["outcome"] = r.outcome.consensus() ? "consensus" : "bottom";
  if (r.outcome.consensus()) j["label"] = r.outcome.label();
  j["phase_rounds"] = r.phase_rounds;
  j["phase_bytes"] = r.phase_bytes;
  return j;
}

Json StatsJson(const CommStats& s) {
  return Json{{"upload", PhaseJson(s[Phase::kUpload])},
              {"phase1", PhaseJson(s[Phase::kPhase1])},
              {"phase2", PhaseJson(s[Phase::kPhase2])},
              {"phase3", PhaseJson(s[Phase::kPhase3])},
              {"delivery", PhaseJson(s[Phase::kDelivery])},
              {"total_rounds", s.TotalRounds()},
              {"total_bytes", s.TotalBytes()}};
}

std::string SelftestLine(const SelftestCheck& c) {
  return std::string(c.passed ? "PASS " : "FAIL ") + c.name +
         (c.detail.empty() ? "" : " (" + c.detail + ")");
}

// Runs `fn` on random inputs of Scmp and counts mismatches against the
// plaintext signed comparison.
uint64_t ScmpMismatches(unsigned bits, const std::vector<int64_t>& a,
                        const std::vector<int64_t>& b, Rng& rng) {
  const Ring r(bits);
  std::vector<uint64_t> ua(a.size()), ub(b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    ua[i] = r.FromSigned(a[i]);
    ub[i] = r.FromSigned(b[i]);
  }
  const SharedVec sa = ShareAll(r, ua, rng), sb = ShareAll(r, ub, rng);
  TripleBudget need;
  need.z2 = MsbZ2Triples(bits) * a.size();
  need.cross = a.size();
  TriplePair triples = DealTriples(need, bits, rng);
  Fabric fabric;
  Link link(fabric, fabric.OpenSession());
  const std::vector<uint64_t> e = ReconstructAll(Scmp(link, triples, sa, sb));
  uint64_t bad = 0;
  for (size_t i = 0; i < a.size(); ++i) bad += e[i] != (a[i] < b[i] ? 1u : 0u);
  return bad;
}

}  // namespace

Workload GenerateWorkload(const ProtocolConfig& config, uint64_t samples,
                          double error_rate, uint64_t seed) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
    throw UsageError("error rate must lie in [0, 1]");
  }
  if (config.classes < 2) throw UsageError("need at least two classes");
  Workload w;
  w.teachers = config.teachers;
  w.classes = config.classes;
  w.error_rate = error_rate;
  w.true_labels.reserve(samples);
  w.predictions.reserve(samples);
  const Rng root(seed);
  for (uint64_t s = 0; s < samples; ++s) {
    Rng rng = root.Split({kWorkloadStream, s});
    const uint32_t truth = static_cast<uint32_t>(rng.Below(config.classes));
    std::vector<PredictionVector> votes;
    votes.reserve(config.teachers);
    for (uint32_t j = 0; j < config.teachers; ++j) {
      uint32_t label = truth;
      if (rng.Uniform() < error_rate) {
        label = static_cast<uint32_t>(rng.Below(config.classes - 1));
        if (label >= truth) ++label;
      }
      votes.push_back(PredictionVector::OneHot(config.classes, label));
    }
    w.true_labels.push_back(truth);
    w.predictions.push_back(std::move(votes));
  }
  return w;
}

ExperimentReport RunExperiment(const ProtocolConfig& config, const Workload& workload,
                               const ExperimentOptions& options) {
  config.Validate();
  if (workload.teachers != config.teachers || workload.classes != config.classes) {
    throw UsageError("workload does not match the protocol configuration");
  }
  ExperimentReport report;
  report.config = config;
  report.error_rate = workload.error_rate;
  Fabric local_fabric;
  Fabric& fabric = options.fabric ? *options.fabric : local_fabric;

  uint64_t correct = 0, oracle_answered = 0, oracle_correct = 0;
  try {
    for (uint64_t s = 0; s < workload.samples(); ++s) {
      const auto& preds = workload.predictions[s];
      SampleResult res = RunSample(config, s, preds, fabric, options.audit);
      SampleRecord rec;
      rec.sample_id = s;
      rec.true_label = workload.true_labels[s];
      rec.outcome = res.outcome;
      rec.oracle = PlaintextOracle(config, preds, DrawSampleNoise(config, s));
      for (size_t p = 0; p < 3; ++p) {
        const auto& c = res.stats.phase[p + 1];
        rec.phase_rounds[p] = c.rounds;
        rec.phase_bytes[p] = c.bytes;
      }
      report.total += res.stats;
      if (rec.outcome.consensus()) {
        ++report.answered;
        correct += rec.outcome.label() == rec.true_label;
      }
      if (rec.oracle.consensus()) {
        ++oracle_answered;
        oracle_correct += rec.oracle.label() == rec.true_label;
      }
      report.oracle_mismatches += !(rec.outcome == rec.oracle);
      report.records.push_back(rec);
    }
  } catch (const ProtocolError& e) {
    report.valid = false;
    report.error = e.what();
  }
  const size_t done = report.records.size();
  report.answered_fraction = done ? static_cast<double>(report.answered) / done : 0.0;
  if (report.answered) {
    report.label_accuracy = static_cast<double>(correct) / report.answered;
  }
  if (oracle_answered) {
    report.oracle_label_accuracy = static_cast<double>(oracle_correct) / oracle_answered;
  }
  report.privacy =
      EvaluateProtocol(config.sigma1, config.sigma2, options.delta, report.answered);
  return report;
}

std::string ReportToJson(const ExperimentReport& r) {
  Json j;
  j["config"] = ConfigJson(r.config);
  j["error_rate"] = r.error_rate;
  j["samples"] = r.records.size();
  j["answered"] = r.answered;
  j["answered_fraction"] = r.answered_fraction;
  j["label_accuracy"] = r.label_accuracy ? Json(*r.label_accuracy) : Json(nullptr);
  j["oracle_label_accuracy"] =
      r.oracle_label_accuracy ? Json(*r.oracle_label_accuracy) : Json(nullptr);
  j["oracle_mismatches"] = r.oracle_mismatches;
  j["valid"] = r.valid;
  if (!r.valid) j["error"] = r.error;
  j["comm"] = StatsJson(r.total);
  j["privacy"] = Json{{"epsilon", NumberOrNull(r.privacy.epsilon)},
                      {"delta", r.privacy.delta},
                      {"alpha_star", r.privacy.alpha_star},
                      {"queries", r.answered}};
  Json outcomes = Json::array();
  for (const SampleRecord& rec : r.records) outcomes.push_back(RecordJson(rec));
  j["outcomes"] = std::move(outcomes);
  return j.dump(2);
}

std::string ReportToCsv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "sample_id,true_label,outcome,label,oracle_outcome,oracle_label,"
         "rounds1,rounds2,rounds3,bytes1,bytes2,bytes3\n";
  for (const SampleRecord& rec : r.records) {
    out << rec.sample_id << ',' << rec.true_label << ','
        << (rec.outcome.consensus() ? "consensus" : "bottom") << ','
        << (rec.outcome.consensus() ? std::to_string(rec.outcome.label()) : "") << ','
        << (rec.oracle.consensus() ? "consensus" : "bottom") << ','
        << (rec.oracle.consensus() ? std::to_string(rec.oracle.label()) : "");
    for (uint64_t v : rec.phase_rounds) out << ',' << v;
    for (uint64_t v : rec.phase_bytes) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string OutcomeJsonLine(const SampleRecord& record) {
  return RecordJson(record).dump();
}

LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw UsageError("x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::vector<BenchRow> RunBench(const ProtocolConfig& base,
                               const std::vector<uint32_t>& classes,
                               const std::vector<uint64_t>& samples) {
  std::vector<BenchRow> rows;
  for (uint32_t n : classes) {
    for (uint64_t count : samples) {
      ProtocolConfig config = base;
      config.classes = n;
      config.sigma1 = 0.0;
      config.sigma2 = 0.0;
      const Workload w = GenerateWorkload(config, count, 0.0, config.seed);
      const ExperimentReport rep = RunExperiment(config, w);
      if (!rep.valid) throw ProtocolError(rep.error);
      BenchRow row;
      row.classes = n;
      row.samples = count;
      row.answered = rep.answered;
      row.rounds = rep.total.TotalRounds();
      row.bytes = rep.total.TotalBytes();
      for (size_t p = 0; p < 3; ++p) {
        row.phase_rounds[p] = rep.total.phase[p + 1].rounds;
        row.phase_bytes[p] = rep.total.phase[p + 1].bytes;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SelftestCheck> RunSelftest(uint64_t seed) {
  std::vector<SelftestCheck> checks;
  Rng rng(seed);

  {
    // Every (a, b) at l = 8 whose difference stays in the signed-safe range.
    std::vector<int64_t> a, b;
    for (int x = -128; x < 128; ++x) {
      for (int y = -128; y < 128; ++y) {
        if (std::abs(x - y) < 128) {
          a.push_back(x);
          b.push_back(y);
        }
      }
    }
    const uint64_t bad = ScmpMismatches(8, a, b, rng);
    checks.push_back({"scmp exhaustive l=8", bad == 0,
                      std::to_string(a.size()) + " pairs, " + std::to_string(bad) +
                          " mismatches"});
  }
  for (unsigned bits : {32u, 64u}) {
    const Ring r(bits);
    const uint64_t quarter = uint64_t{1} << (bits - 2);
    std::vector<int64_t> a(10000), b(10000);
    for (size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<int64_t>(rng.Below(2 * quarter)) - static_cast<int64_t>(quarter);
      b[i] = static_cast<int64_t>(rng.Below(2 * quarter)) - static_cast<int64_t>(quarter);
    }
    const uint64_t bad = ScmpMismatches(bits, a, b, rng);
    checks.push_back({"scmp random l=" + std::to_string(bits), bad == 0,
                      std::to_string(bad) + " mismatches in 10000"});
  }
  {
    uint64_t bad = 0, runs = 0;
    Fabric fabric;
    for (uint32_t k : {10u, 50u}) {
      for (uint32_t n : {2u, 10u}) {
        for (double sigma : {0.0, 1.0, 10.0}) {
          ProtocolConfig config;
          config.teachers = k;
          config.classes = n;
          config.sigma1 = sigma;
          config.sigma2 = sigma;
          config.seed = rng.NextU64();
          const Workload w = GenerateWorkload(config, 10, 0.4, config.seed);
          for (uint64_t s = 0; s < w.samples(); ++s) {
            const auto out = RunSample(config, s, w.predictions[s], fabric).outcome;
            bad += !(out == PlaintextOracle(config, w.predictions[s],
                                            DrawSampleNoise(config, s)));
            ++runs;
          }
        }
      }
    }
    checks.push_back({"protocol matches plaintext oracle", bad == 0,
                      std::to_string(runs) + " samples, " + std::to_string(bad) +
                          " mismatches"});
  }
  {
    const double eps = ClosedFormEpsilon(3.0, std::sqrt(2.0), std::exp(-1.0));
    const double grid = RdpToDp(RdpOfProtocol(3.0, std::sqrt(2.0)), std::exp(-1.0)).epsilon;
    checks.push_back({"accountant fixed point", std::abs(eps - 3.0) < 1e-12 &&
                                                    std::abs(grid - 3.0) < 1e-9,
                      "closed form " + std::to_string(eps)});
  }
  return checks;
}

std::vector<uint64_t> ParseRange(const std::string& text) {
  auto parse = [&](const std::string& s) -> uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("bad range '" + text + "'");
    }
    return std::stoull(s);
  };
  const size_t dots = text.find("..");
  if (dots == std::string::npos) return {parse(text)};
  const std::string lo_s = text.substr(0, dots);
  std::string hi_s = text.substr(dots + 2);
  std::string step_s;
  if (const size_t colon = hi_s.find(':'); colon != std::string::npos) {
    step_s = hi_s.substr(colon + 1);
    hi_s = hi_s.substr(0, colon);
  }
  const uint64_t lo = parse(lo_s), hi = parse(hi_s);
  const uint64_t step = step_s.empty() ? lo : parse(step_s);
  if (step == 0 || hi < lo) throw UsageError("bad range '" + text + "'");
  std::vector<uint64_t> out;
  for (uint64_t v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-server private label aggregation: simulator, accountant, benchmarks"};
  app.require_subcommand(1);

  ProtocolConfig config;
  std::string classes_text = "10", samples_text = "1000", strategy_text = "sequential";
  std::string output = "json", trace_path, outcomes_path;
  double error_rate = 0.0, delta = 1e-5;
  uint64_t queries = 1;
  double target_epsilon = 0.0, ratio = 0.0;

  auto add_protocol_flags = [&](CLI::App* sub) {
    sub->add_option("--teachers", config.teachers, "number of teachers K")
        ->check(CLI::PositiveNumber);
    sub->add_option("--classes", classes_text, "number of classes N (bench: range a..b[:step])");
    sub->add_option("--samples", samples_text, "unlabeled samples (bench: range)");
    sub->add_option("--sigma1", config.sigma1, "threshold-check noise std-dev");
    sub->add_option("--sigma2", config.sigma2, "argmax noise std-dev");
    sub->add_option("--threshold", config.threshold, "consensus threshold, fraction of K");
    sub->add_option("--ring-bits", config.ring_bits, "ring width l");
    sub->add_option("--scale", config.scale, "fixed-point scale");
    sub->add_option("--seed", config.seed, "run seed");
    sub->add_option("--strategy", strategy_text, "sequential | tournament")
        ->check(CLI::IsMember({"sequential", "tournament"}));
    sub->add_option("--error-rate", error_rate, "synthetic teacher error rate");
    sub->add_option("--delta", delta, "DP failure probability");
    sub->add_option("--output", output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--trace", trace_path, "dump framed fabric messages to this file");
  };

  CLI::App* run = app.add_subcommand("run", "full experiment over a synthetic workload");
  add_protocol_flags(run);
  run->add_option("--outcomes", outcomes_path, "write one JSON line per sample");

  CLI::App* accountant = app.add_subcommand("accountant", "privacy accounting only");
  accountant->add_option("--sigma1", config.sigma1, "threshold-check noise std-dev");
  accountant->add_option("--sigma2", config.sigma2, "argmax noise std-dev");
  accountant->add_option("--delta", delta, "DP failure probability");
  accountant->add_option("--queries", queries, "answered samples to compose");
  accountant->add_option("--epsilon", target_epsilon, "solve sigmas for this epsilon");
  accountant->add_option("--ratio", ratio, "sigma1 / sigma2 when solving");

  CLI::App* selftest = app.add_subcommand("selftest", "oracle and gadget self checks");
  selftest->add_option("--seed", config.seed, "seed");

  CLI::App* bench = app.add_subcommand("bench", "round and byte scaling tables");
  add_protocol_flags(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    config.strategy = ParseMaxStrategy(strategy_text);

    if (*accountant) {
      Json j;
      if (target_epsilon > 0.0) {
        if (!(ratio > 0.0)) throw UsageError("--epsilon needs --ratio > 0");
        const NoiseSolution sol = SolveNoiseForEpsilon(target_epsilon, delta, ratio, queries);
        config.sigma1 = sol.sigma1;
        config.sigma2 = sol.sigma2;
      }
      const DpGuarantee g = EvaluateProtocol(config.sigma1, config.sigma2, delta, queries);
      j["epsilon"] = NumberOrNull(g.epsilon);
      j["delta"] = delta;
      j["sigma1"] = config.sigma1;
      j["sigma2"] = config.sigma2;
      j["queries"] = queries;
      j["alpha_star"] = g.alpha_star;
      out << j.dump(2) << '\n';
      return 0;
    }

    if (*selftest) {
      bool ok = true;
      for (const SelftestCheck& c : RunSelftest(config.seed)) {
        out << SelftestLine(c) << '\n';
        ok = ok && c.passed;
      }
      return ok ? 0 : 3;
    }

    if (*bench) {
      std::vector<uint32_t> classes;
      for (uint64_t n : ParseRange(classes_text)) classes.push_back(static_cast<uint32_t>(n));
      const std::vector<uint64_t> samples = ParseRange(samples_text);
      const std::vector<BenchRow> rows = RunBench(config, classes, samples);
      if (output == "csv") {
        out << "classes,samples,answered,rounds,bytes,rounds1,rounds2,rounds3,bytes1,bytes2,bytes3\n";
        for (const BenchRow& r : rows) {
          out << r.classes << ',' << r.samples << ',' << r.answered << ',' << r.rounds << ','
              << r.bytes;
          for (uint64_t v : r.phase_rounds) out << ',' << v;
          for (uint64_t v : r.phase_bytes) out << ',' << v;
          out << '\n';
        }
        return 0;
      }
      Json j;
      Json table = Json::array();
      std::vector<double> xs_n, ys_n, xs_s, ys_s;
      for (const BenchRow& r : rows) {
        table.push_back(Json{{"classes", r.classes}, {"samples", r.samples},
                             {"answered", r.answered}, {"rounds", r.rounds},
                             {"bytes", r.bytes}, {"phase_rounds", r.phase_rounds},
                             {"phase_bytes", r.phase_bytes}});
        if (samples.size() == 1) {
          xs_n.push_back(r.classes);
          ys_n.push_back(static_cast<double>(r.rounds));
        }
        if (classes.size() == 1) {
          xs_s.push_back(static_cast<double>(r.samples));
          ys_s.push_back(static_cast<double>(r.rounds));
        }
      }
      j["rows"] = std::move(table);
      auto fit_json = [](const LinearFit& f) {
        return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
      };
      if (xs_n.size() >= 2) j["rounds_vs_classes"] = fit_json(FitLine(xs_n, ys_n));
      if (xs_s.size() >= 2) j["rounds_vs_samples"] = fit_json(FitLine(xs_s, ys_s));
      out << j.dump(2) << '\n';
      return 0;
    }

    // run
    const std::vector<uint64_t> classes = ParseRange(classes_text);
    const std::vector<uint64_t> samples = ParseRange(samples_text);
    if (classes.size() != 1 || samples.size() != 1) {
      throw UsageError("run takes a single --classes and --samples value");
    }
    config.classes = static_cast<uint32_t>(classes[0]);
    config.Validate();
    const Workload w = GenerateWorkload(config, samples[0], error_rate, config.seed);
    Fabric fabric;
    fabric.EnableTrace(!trace_path.empty());
    ExperimentOptions options;
    options.delta = delta;
    options.fabric = &fabric;
    const ExperimentReport report = RunExperiment(config, w, options);
    if (!trace_path.empty()) {
      std::ofstream trace(trace_path, std::ios::binary);
      if (!trace) throw UsageError("cannot open trace file " + trace_path);
      fabric.DumpTrace(trace);
    }
    if (!outcomes_path.empty()) {
      std::ofstream lines(outcomes_path);
      if (!lines) throw UsageError("cannot open outcomes file " + outcomes_path);
      for (const SampleRecord& r : report.records) lines << OutcomeJsonLine(r) << '\n';
    }
    out << (output == "csv" ? ReportToCsv(report) : ReportToJson(report) + "\n");
    if (!report.valid) {
      err << "protocol error: " << report.error << '\n';
      return 3;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const RangeError& e) {
    err << "range error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return 4;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace sedml
