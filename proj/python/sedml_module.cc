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


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <vector>

#include "sedml/errors.h"
#include "sedml/gadgets.h"
#include "sedml/harness.h"
#include "sedml/privacy.h"
#include "sedml/protocol.h"
#include "sedml/ring.h"
#include "sedml/rng.h"
#include "sedml/simnet.h"
#include "sedml/triples.h"

namespace py = pybind11;

namespace sedml {
namespace {

std::vector<PredictionVector> ToPredictions(uint32_t classes,
                                            const std::vector<uint32_t>& labels) {
  std::vector<PredictionVector> out;
  out.reserve(labels.size());
  for (uint32_t l : labels) out.push_back(PredictionVector::OneHot(classes, l));
  return out;
}

py::object OutcomeToPy(const AggregationOutcome& o) {
  if (!o.consensus()) return py::none();
  return py::int_(o.label());
}

// Shares both inputs, runs the comparison over a fresh session and returns
// (e values, rounds metered).
py::tuple PyScmp(const std::vector<int64_t>& a, const std::vector<int64_t>& b,
                 unsigned bits, uint64_t seed) {
  if (a.size() != b.size()) throw UsageError("operand length mismatch");
  const Ring r(bits);
  Rng rng(seed);
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
  const auto e = ReconstructAll(Scmp(link, t, ShareAll(r, ua, rng), ShareAll(r, ub, rng)));
  return py::make_tuple(e, f.SnapshotStats(link.id())[Phase::kPhase1].rounds);
}

py::dict StatsToPy(const CommStats& s) {
  py::dict d;
  const char* names[] = {"upload", "phase1", "phase2", "phase3", "delivery"};
  for (size_t p = 0; p < kNumPhases; ++p) {
    py::dict c;
    c["rounds"] = s.phase[p].rounds;
    c["messages"] = s.phase[p].messages;
    c["bytes"] = s.phase[p].bytes;
    d[names[p]] = c;
  }
  return d;
}

}  // namespace
}  // namespace sedml

PYBIND11_MODULE(_sedml, m) {
  using namespace sedml;
  m.doc() = "Two-server private label aggregation over additive shares";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_OverflowError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  py::enum_<MaxStrategy>(m, "MaxStrategy")
      .value("SEQUENTIAL", MaxStrategy::kSequential)
      .value("TOURNAMENT", MaxStrategy::kTournament);

  py::class_<ProtocolConfig>(m, "ProtocolConfig")
      .def(py::init<>())
      .def_readwrite("teachers", &ProtocolConfig::teachers)
      .def_readwrite("classes", &ProtocolConfig::classes)
      .def_readwrite("threshold", &ProtocolConfig::threshold)
      .def_readwrite("sigma1", &ProtocolConfig::sigma1)
      .def_readwrite("sigma2", &ProtocolConfig::sigma2)
      .def_readwrite("ring_bits", &ProtocolConfig::ring_bits)
      .def_readwrite("scale", &ProtocolConfig::scale)
      .def_readwrite("seed", &ProtocolConfig::seed)
      .def_readwrite("strategy", &ProtocolConfig::strategy)
      .def("validate", &ProtocolConfig::Validate)
      .def("threshold_votes", &ProtocolConfig::ThresholdVotes);

  m.def(
      "share",
      [](uint64_t secret, uint64_t mask, unsigned bits) {
        auto [s0, s1] = ShareWithMask(RingElement(secret, Ring(bits)), mask);
        return py::make_tuple(s0.element.value(), s1.element.value());
      },
      py::arg("secret"), py::arg("mask"), py::arg("bits") = 64,
      "Additive shares (secret - mask, mask) mod 2^bits.");
  m.def(
      "reconstruct",
      [](uint64_t s0, uint64_t s1, unsigned bits) {
        const Ring r(bits);
        return Reconstruct(Share{RingElement(s0, r), Party::kS0},
                           Share{RingElement(s1, r), Party::kS1})
            .value();
      },
      py::arg("s0"), py::arg("s1"), py::arg("bits") = 64);

  m.def("scmp", &PyScmp, py::arg("a"), py::arg("b"), py::arg("bits") = 64,
        py::arg("seed") = 0,
        "Secure signed a < b over fresh shares; returns (bits, rounds).");

  m.def(
      "run_sample",
      [](const ProtocolConfig& c, const std::vector<uint32_t>& labels, uint64_t sample_id) {
        Fabric f;
        const SampleResult r = RunSample(c, sample_id, ToPredictions(c.classes, labels), f);
        return py::make_tuple(OutcomeToPy(r.outcome), StatsToPy(r.stats));
      },
      py::arg("config"), py::arg("labels"), py::arg("sample_id") = 0,
      "One secure aggregation from teacher labels; returns (label or None, stats).");
  m.def(
      "plaintext_oracle",
      [](const ProtocolConfig& c, const std::vector<uint32_t>& labels, uint64_t sample_id) {
        return OutcomeToPy(PlaintextOracle(c, ToPredictions(c.classes, labels),
                                           DrawSampleNoise(c, sample_id)));
      },
      py::arg("config"), py::arg("labels"), py::arg("sample_id") = 0);

  m.def(
      "run_experiment",
      [](const ProtocolConfig& c, uint64_t samples, double error_rate, double delta) {
        ExperimentOptions opt;
        opt.delta = delta;
        return ReportToJson(
            RunExperiment(c, GenerateWorkload(c, samples, error_rate, c.seed), opt));
      },
      py::arg("config"), py::arg("samples"), py::arg("error_rate") = 0.0,
      py::arg("delta") = 1e-5, "Full experiment; returns the JSON report text.");

  m.def("fixed_point_encode",
        [](double x, uint64_t scale, unsigned bits) {
          return FixedPointEncode(x, scale, Ring(bits)).signed_value();
        },
        py::arg("x"), py::arg("scale"), py::arg("bits") = 64);
  m.def("closed_form_epsilon", &ClosedFormEpsilon, py::arg("sigma1"), py::arg("sigma2"),
        py::arg("delta"));
  m.def(
      "epsilon",
      [](double s1, double s2, double delta, uint64_t queries) {
        return EvaluateProtocol(s1, s2, delta, queries).epsilon;
      },
      py::arg("sigma1"), py::arg("sigma2"), py::arg("delta"), py::arg("queries") = 1);
  m.def(
      "solve_noise",
      [](double target, double delta, double ratio, uint64_t queries) {
        const NoiseSolution s = SolveNoiseForEpsilon(target, delta, ratio, queries);
        return py::make_tuple(s.sigma1, s.sigma2);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("ratio"), py::arg("queries") = 1);
}
