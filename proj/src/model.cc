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

#include "fediic/model.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fediic/errors.h"
#include "fediic/random.h"

namespace fediic {

void ModelSpec::Validate() const {
  if (input_dim == 0 || hidden == 0 || feat_dim == 0 || proj_hidden == 0 ||
      proj_dim == 0) {
    throw ConfigError("model: every layer width must be positive");
  }
  if (num_classes < 2) throw ConfigError("model: need at least 2 classes");
}

namespace {

std::vector<Shape> ShapesFor(const ModelSpec& s) {
  const auto L = static_cast<std::size_t>(s.num_classes);
  return {
      {s.input_dim, s.hidden},   {s.hidden},      {s.hidden, s.feat_dim},
      {s.feat_dim},              {s.feat_dim, s.proj_hidden},
      {s.proj_hidden},           {s.proj_hidden, s.proj_dim},
      {s.proj_dim},              {L, s.feat_dim}, {L},
  };
}

// Fan-in of each tensor for the default initializer.
std::vector<std::size_t> FanIns(const ModelSpec& s) {
  return {s.input_dim,   s.input_dim,   s.hidden,      s.hidden,
          s.feat_dim,    s.feat_dim,    s.proj_hidden, s.proj_hidden,
          s.feat_dim,    s.feat_dim};
}

constexpr std::array<std::string_view, ModelParams::kNumTensors> kNames = {
    "extractor.w1", "extractor.b1", "extractor.w2", "extractor.b2",
    "projector.w1", "projector.b1", "projector.w2", "projector.b2",
    "classifier.w", "classifier.b"};

}  // namespace

ModelParams::ModelParams(ModelSpec spec, std::vector<Tensor> tensors)
    : spec_(spec), tensors_(std::move(tensors)) {}

ModelParams FromTensors(const ModelSpec& spec, std::vector<Tensor> tensors) {
  spec.Validate();
  const auto shapes = ShapesFor(spec);
  if (tensors.size() != shapes.size()) {
    throw StructuralError("model: expected " + std::to_string(shapes.size()) +
                          " tensors, got " + std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (tensors[i].shape() != shapes[i]) {
      throw StructuralError("model: tensor " + std::string(kNames[i]) +
                            " has shape " + ShapeToString(tensors[i].shape()) +
                            ", expected " + ShapeToString(shapes[i]));
    }
  }
  return ModelParams(spec, std::move(tensors));
}

ModelParams ModelParams::Init(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  Rng rng(seed);
  const auto shapes = ShapesFor(spec);
  const auto fan_in = FanIns(spec);
  std::vector<Tensor> tensors;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in[i]));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor t(shapes[i]);
    for (double& v : t.values()) v = u(rng);
    tensors.push_back(std::move(t));
  }
  return ModelParams(spec, std::move(tensors));
}

ModelParams ModelParams::Zeros(const ModelSpec& spec) {
  spec.Validate();
  std::vector<Tensor> tensors;
  for (const Shape& s : ShapesFor(spec)) tensors.emplace_back(s, 0.0);
  return ModelParams(spec, std::move(tensors));
}

std::string_view ModelParams::Name(std::size_t i) { return kNames.at(i); }

std::size_t ModelParams::NumValues() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

bool ModelParams::AllFinite() const {
  return std::all_of(tensors_.begin(), tensors_.end(),
                     [](const Tensor& t) { return t.all_finite(); });
}

BoundModel Bind(ad::Tape& tape, const ModelParams& params, bool trainable) {
  BoundModel m;
  m.vars.reserve(params.tensors().size());
  for (const Tensor& t : params.tensors())
    m.vars.push_back(trainable ? tape.Leaf(t) : tape.Constant(t));
  return m;
}

BoundModel BindVars(std::vector<ad::Var> vars) {
  if (vars.size() != ModelParams::kNumTensors) {
    throw StructuralError("model: wrong number of bound parameters");
  }
  return BoundModel{std::move(vars)};
}

ad::Var ExtractFeatures(const BoundModel& m, ad::Var x) {
  using P = ModelParams;
  if (x.shape().size() != 2 || x.shape()[1] != m[P::kExtractorW1].shape()[0]) {
    throw StructuralError("model: input shape " + ShapeToString(x.shape()) +
                          " does not match extractor input width " +
                          std::to_string(m[P::kExtractorW1].shape()[0]));
  }
  ad::Var h = ad::Relu(
      ad::AddRow(ad::MatMul(x, m[P::kExtractorW1]), m[P::kExtractorB1]));
  return ad::Relu(
      ad::AddRow(ad::MatMul(h, m[P::kExtractorW2]), m[P::kExtractorB2]));
}

ad::Var ClassifierLogits(const BoundModel& m, ad::Var features) {
  using P = ModelParams;
  return ad::AddRow(ad::MatMulTransposed(features, m[P::kClassifierW]),
                    m[P::kClassifierB]);
}

ad::Var ProjectionHead(const BoundModel& m, ad::Var features) {
  using P = ModelParams;
  ad::Var h = ad::Relu(
      ad::AddRow(ad::MatMul(features, m[P::kProjectorW1]), m[P::kProjectorB1]));
  return ad::AddRow(ad::MatMul(h, m[P::kProjectorW2]), m[P::kProjectorB2]);
}

ad::Var Embed(const BoundModel& m, ad::Var features) {
  return ad::RowL2Normalize(ProjectionHead(m, features));
}

Tensor ForwardLogits(const ModelParams& params, const Tensor& x) {
  ad::Tape tape;
  BoundModel m = Bind(tape, params, false);
  return ClassifierLogits(m, ExtractFeatures(m, tape.Constant(x))).value();
}

Tensor ForwardEmbedding(const ModelParams& params, const Tensor& x) {
  ad::Tape tape;
  BoundModel m = Bind(tape, params, false);
  return Embed(m, ExtractFeatures(m, tape.Constant(x))).value();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> RowNorms(const Tensor& v) {
  std::vector<double> norms(v.rows());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    double s = 0.0;
    for (double x : v.row(i)) s += x * x;
    norms[i] = std::sqrt(s);
  }
  return norms;
}

void RequirePrototypeMatrix(const Tensor& v) {
  if (v.rank() != 2 || v.rows() < 2) {
    throw ContractError("prototypes: need a matrix with at least two rows");
  }
  const auto norms = RowNorms(v);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] == 0.0) {
      throw ContractError("prototypes: row " + std::to_string(i) + " is zero");
    }
  }
}

Tensor CosineMatrix(const Tensor& v, const std::vector<double>& norms) {
  Tensor cos = kernels::MatMulTransposed(v, v);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.rows(); ++j) cos(i, j) /= norms[i] * norms[j];
  return cos;
}

// Index of the most similar other row; lowest index on ties.
std::size_t NearestOther(const Tensor& cos, std::size_t i) {
  std::size_t best = i == 0 ? 1 : 0;
  for (std::size_t j = 0; j < cos.rows(); ++j) {
    if (j == i) continue;
    if (cos(i, j) > cos(i, best)) best = j;
  }
  return best;
}

}  // namespace

double PrototypeObjective(const Tensor& v) {
  RequirePrototypeMatrix(v);
  const Tensor cos = CosineMatrix(v, RowNorms(v));
  double total = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i) total += cos(i, NearestOther(cos, i));
  return total;
}

double MaxPairwiseCosine(const Tensor& v) {
  RequirePrototypeMatrix(v);
  const Tensor cos = CosineMatrix(v, RowNorms(v));
  double best = -2.0;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = i + 1; j < v.rows(); ++j) best = std::max(best, cos(i, j));
  return best;
}

namespace {

// Row i's term contributes the mean gradient over every j whose cosine is
// within `active_tol` of the row maximum. active_tol = 0 keeps one j.
Tensor DescentDirection(const Tensor& v, double active_tol) {
  const auto norms = RowNorms(v);
  const Tensor cos = CosineMatrix(v, norms);
  const std::size_t d = v.cols();
  Tensor grad(v.shape(), 0.0);
  // d cos(a, b) / da = (b/|b| - cos * a/|a|) / |a|
  auto accumulate = [&](std::size_t a, std::size_t b, double c, double w) {
    for (std::size_t k = 0; k < d; ++k) {
      const double a_hat = v(a, k) / norms[a];
      const double b_hat = v(b, k) / norms[b];
      grad(a, k) += w * (b_hat - c * a_hat) / norms[a];
    }
  };
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const std::size_t nearest = NearestOther(cos, i);
    if (active_tol <= 0.0) {
      accumulate(i, nearest, cos(i, nearest), 1.0);
      accumulate(nearest, i, cos(i, nearest), 1.0);
      continue;
    }
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < v.rows(); ++j)
      if (j != i && cos(i, j) >= cos(i, nearest) - active_tol) active.push_back(j);
    const double w = 1.0 / static_cast<double>(active.size());
    for (std::size_t j : active) {
      accumulate(i, j, cos(i, j), w);
      accumulate(j, i, cos(i, j), w);
    }
  }
  return grad;
}

}  // namespace

Tensor PrototypeObjectiveGradient(const Tensor& v) {
  RequirePrototypeMatrix(v);
  return DescentDirection(v, 0.0);
}

Tensor FinetunePrototypes(Tensor v, const PrototypeOptions& options,
                          FinetuneTrace* trace) {
  RequirePrototypeMatrix(v);
  double objective = PrototypeObjective(v);
  if (trace) {
    trace->objective = {objective};
    trace->steps = 0;
  }
  for (int step = 0; step < options.max_steps; ++step) {
    const Tensor grad = DescentDirection(v, options.active_tol);
    double eta = options.step_size;
    bool accepted = false;
    Tensor candidate;
    double candidate_objective = 0.0;
    for (int h = 0; h <= options.max_halvings; ++h, eta *= 0.5) {
      candidate = v;
      for (std::size_t k = 0; k < v.size(); ++k) candidate[k] -= eta * grad[k];
      bool has_zero_row = false;
      for (double n : RowNorms(candidate)) has_zero_row |= n == 0.0;
      if (has_zero_row) continue;
      candidate_objective = PrototypeObjective(candidate);
      if (candidate_objective <= objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double improvement = objective - candidate_objective;
    v = std::move(candidate);
    objective = candidate_objective;
    if (trace) {
      trace->objective.push_back(objective);
      trace->steps = step + 1;
    }
    if (improvement < options.stop_tol) break;
  }
  return v;
}

PrototypeSet DerivePrototypes(const ModelParams& params,
                              const PrototypeOptions& options) {
  ad::Tape tape;
  BoundModel m = Bind(tape, params, false);
  Tensor initial =
      ProjectionHead(m, tape.Constant(params[ModelParams::kClassifierW])).value();
  // A class whose classifier row maps to the zero vector gets a fixed
  // coordinate direction so fine-tuning has something to rotate.
  for (std::size_t i = 0; i < initial.rows(); ++i) {
    auto row = initial.row(i);
    if (std::all_of(row.begin(), row.end(), [](double x) { return x == 0.0; }))
      row[i % row.size()] = 1.0;
  }
  Tensor tuned = FinetunePrototypes(std::move(initial), options);
  return PrototypeSet{kernels::RowL2Normalize(tuned)};
}

}  // namespace fediic
