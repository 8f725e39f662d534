/*
 * Copyright 2026 The FedIIC Simulator Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python module `fediic._fediic`.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fediic/config.h"
#include "fediic/errors.h"
#include "fediic/losses.h"
#include "fediic/metrics.h"
#include "fediic/model.h"
#include "fediic/paillier.h"
#include "fediic/partition.h"
#include "fediic/report.h"
#include "fediic/secure_aggregation.h"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

fediic::Tensor ToTensor(const Array& a) {
  if (a.ndim() != 2) throw fediic::StructuralError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return fediic::Tensor::Matrix(rows, cols,
                                std::vector<double>(a.data(), a.data() + a.size()));
}

Array ToArray(const fediic::Tensor& t) {
  Array out(t.shape());
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::object FromJson(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

// Value and gradient of a loss built on a single matrix input.
std::tuple<double, Array> ValueAndGrad(
    const Array& input, const std::function<fediic::ad::Var(fediic::ad::Var)>& build) {
  fediic::ad::Tape tape;
  const fediic::ad::Var x = tape.Leaf(ToTensor(input));
  const fediic::ad::Var loss = build(x);
  tape.Backward(loss);
  return {loss.value()[0], ToArray(x.grad())};
}

}  // namespace

PYBIND11_MODULE(_fediic, m) {
  m.doc() = "FedIIC federated-learning simulator";

  auto base = py::register_exception<fediic::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<fediic::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<fediic::DataError>(m, "DataError", base.ptr());
  py::register_exception<fediic::ContractError>(m, "ContractError", base.ptr());
  py::register_exception<fediic::NumericError>(m, "NumericError", base.ptr());

  m.def("long_tail_counts",
        [](int num_classes, std::int64_t num_max, double gamma, int major_count) {
          return fediic::LongTailCounts({num_classes, num_max, gamma, major_count});
        },
        py::arg("num_classes"), py::arg("num_max"), py::arg("gamma"), py::arg("major_count"));

  m.def("make_blobs",
        [](int num_classes, std::size_t dim, std::size_t per_class, double spread,
           std::uint64_t seed) {
          const auto ds = fediic::MakeBlobs(num_classes, dim, per_class, spread, seed);
          return std::make_tuple(ToArray(ds.AllFeatures()), ds.labels);
        },
        py::arg("num_classes"), py::arg("dim"), py::arg("per_class"), py::arg("spread"),
        py::arg("seed"));

  m.def("l2_partition",
        [](const std::vector<int>& labels, int num_classes, int num_clients,
           double alpha_minor, double alpha_major, const std::vector<int>& minor_classes,
           bool agglomerate, std::uint64_t seed) {
          fediic::LabeledDataset ds;
          ds.dim = 1;
          ds.num_classes = num_classes;
          ds.labels = labels;
          ds.features.assign(labels.size(), 0.0);
          ds.Validate();
          fediic::PartitionConfig config;
          config.num_clients = num_clients;
          config.alpha_minor = alpha_minor;
          config.alpha_major = alpha_major;
          config.minor_classes = minor_classes;
          config.agglomerate = agglomerate;
          config.seed = seed;
          const auto out = fediic::L2Partition(ds, config);
          nlohmann::json doc = fediic::PartitionToJson(out.partition);
          doc["report"] = fediic::ReportToJson(out.report);
          return FromJson(doc);
        },
        py::arg("labels"), py::arg("num_classes"), py::arg("num_clients"),
        py::arg("alpha_minor") = 50.0, py::arg("alpha_major") = 0.1,
        py::arg("minor_classes") = std::vector<int>{}, py::arg("agglomerate") = true,
        py::arg("seed") = 0);

  m.def("dynamic_temperature", &fediic::DynamicTemperature, py::arg("p_i"), py::arg("p_j"),
        py::arg("tau"), py::arg("t"));

  m.def("scl_loss",
        [](const Array& z, const std::vector<int>& labels, double tau) {
          return ValueAndGrad(z, [&](fediic::ad::Var v) { return fediic::SclLoss(v, labels, tau); });
        },
        py::arg("z"), py::arg("labels"), py::arg("tau"),
        "Returns (loss, d loss / d z) for unit-norm rows z.");
  m.def("intra_loss",
        [](const Array& z, const std::vector<int>& labels, const std::vector<double>& prior,
           double tau, double t) {
          return ValueAndGrad(
              z, [&](fediic::ad::Var v) { return fediic::IntraLoss(v, labels, prior, tau, t); });
        },
        py::arg("z"), py::arg("labels"), py::arg("prior"), py::arg("tau"), py::arg("t"));
  m.def("inter_loss",
        [](const Array& z, const std::vector<int>& labels, const Array& prototypes, double tau) {
          const fediic::Tensor v = ToTensor(prototypes);
          return ValueAndGrad(
              z, [&](fediic::ad::Var x) { return fediic::InterLoss(x, labels, v, tau); });
        },
        py::arg("z"), py::arg("labels"), py::arg("prototypes"), py::arg("tau"));
  m.def("ce_loss",
        [](const Array& logits, const std::vector<int>& labels) {
          return ValueAndGrad(logits,
                              [&](fediic::ad::Var v) { return fediic::CeLoss(v, labels); });
        },
        py::arg("logits"), py::arg("labels"));
  m.def("dala_loss",
        [](const Array& logits, const std::vector<int>& labels,
           const std::vector<double>& margins) {
          fediic::MarginTable table;
          table.margins = margins;
          return ValueAndGrad(
              logits, [&](fediic::ad::Var v) { return fediic::DalaLoss(v, labels, table); });
        },
        py::arg("logits"), py::arg("labels"), py::arg("margins"));
  m.def("dala_margins",
        [](const std::vector<std::int64_t>& counts, const std::vector<double>& mean_losses,
           double q) { return fediic::DalaMargins(counts, mean_losses, q).margins; },
        py::arg("counts"), py::arg("mean_losses"), py::arg("q"));

  m.def("prototype_objective",
        [](const Array& v) { return fediic::PrototypeObjective(ToTensor(v)); }, py::arg("v"));
  m.def("max_pairwise_cosine",
        [](const Array& v) { return fediic::MaxPairwiseCosine(ToTensor(v)); }, py::arg("v"));
  m.def("finetune_prototypes",
        [](const Array& v, int max_steps, double step_size, double stop_tol) {
          fediic::PrototypeOptions options;
          options.max_steps = max_steps;
          options.step_size = step_size;
          options.stop_tol = stop_tol;
          return ToArray(fediic::FinetunePrototypes(ToTensor(v), options));
        },
        py::arg("v"), py::arg("max_steps") = 200, py::arg("step_size") = 0.5,
        py::arg("stop_tol") = 1e-5);

  m.def("bacc",
        [](const std::vector<std::vector<std::int64_t>>& cm) {
          fediic::ConfusionMatrix matrix(static_cast<int>(cm.size()));
          for (std::size_t t = 0; t < cm.size(); ++t) {
            if (cm[t].size() != cm.size()) throw fediic::StructuralError("matrix must be square");
            for (std::size_t p = 0; p < cm.size(); ++p)
              matrix.Add(static_cast<int>(t), static_cast<int>(p), cm[t][p]);
          }
          return fediic::Bacc(matrix);
        },
        py::arg("confusion_matrix"));
  m.def("group_bacc",
        [](const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes,
           const std::vector<int>& minority) {
          const auto cm = fediic::ConfusionMatrix::FromPredictions(truth, predicted, num_classes);
          const auto g = fediic::ComputeGroupBacc(cm, minority);
          return std::make_tuple(g.minority, g.majority, g.overall);
        },
        py::arg("truth"), py::arg("predicted"), py::arg("num_classes"), py::arg("minority"));
  m.def("rounds_to_match_baseline",
        [](const std::vector<double>& series, double baseline_best) {
          return fediic::RoundsToMatchBaseline(series, baseline_best);
        },
        py::arg("series"),
        py::arg("baseline_best"));
  m.def("speedup", &fediic::Speedup, py::arg("baseline_rounds"), py::arg("method_rounds"));

  m.def("generate_keys",
        [](int bits, std::uint64_t seed) {
          return FromJson(fediic::paillier::KeyPairToJson(
              fediic::paillier::GenerateKeyPair(bits, seed)));
        },
        py::arg("bits") = 512, py::arg("seed") = 0);
  m.def("secure_sum",
        [](const std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>>& parts,
           int key_bits, std::uint64_t seed, int scale_bits) {
          std::vector<fediic::ClassStats> stats;
          for (const auto& [counts, totals] : parts) stats.push_back({counts, totals});
          const auto keys = fediic::paillier::GenerateKeyPair(key_bits, seed);
          const auto sum =
              fediic::SecureSum(keys, stats, fediic::FixedPointCodec(scale_bits), seed + 1);
          return std::make_tuple(sum.counts, sum.loss_totals);
        },
        py::arg("parts"), py::arg("key_bits") = 512, py::arg("seed") = 0,
        py::arg("scale_bits") = 16,
        "Encrypted per-class sum of (counts, loss_totals) pairs.");

  m.def("train",
        [](const std::string& config_path, const std::string& out_dir) {
          py::gil_scoped_release release;
          return fediic::TrainAll(fediic::LoadConfig(config_path), out_dir);
        },
        py::arg("config_path"), py::arg("out_dir"),
        "Runs every configured mode and seed; returns the run directories.");
}
