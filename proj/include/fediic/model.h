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

// The classification network: a fully-connected feature extractor, a
// two-layer projection head producing unit-norm embeddings, and a linear
// classifier whose weight rows double as the source of class prototypes.

#ifndef FEDIIC_MODEL_H_
#define FEDIIC_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fediic/autodiff.h"
#include "fediic/tensor.h"
#include "json.hpp"

namespace fediic {

struct ModelSpec {
  std::size_t input_dim = 16;
  std::size_t hidden = 64;
  std::size_t feat_dim = 32;
  std::size_t proj_hidden = 32;
  std::size_t proj_dim = 16;
  int num_classes = 2;

  void Validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

class ModelParams {
 public:
  enum Index : std::size_t {
    kExtractorW1 = 0,  // input_dim x hidden
    kExtractorB1,      // hidden
    kExtractorW2,      // hidden x feat_dim
    kExtractorB2,      // feat_dim
    kProjectorW1,      // feat_dim x proj_hidden
    kProjectorB1,      // proj_hidden
    kProjectorW2,      // proj_hidden x proj_dim
    kProjectorB2,      // proj_dim
    kClassifierW,      // num_classes x feat_dim, row c is w^c
    kClassifierB,      // num_classes
    kNumTensors,
  };

  ModelParams() = default;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  static ModelParams Init(const ModelSpec& spec, std::uint64_t seed);
  static ModelParams Zeros(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  Tensor& operator[](Index i) { return tensors_[i]; }
  const Tensor& operator[](Index i) const { return tensors_[i]; }

  static std::string_view Name(std::size_t i);
  std::size_t NumValues() const;
  bool AllFinite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(ModelSpec spec, std::vector<Tensor> tensors);
  friend ModelParams FromTensors(const ModelSpec&, std::vector<Tensor>);

  ModelSpec spec_;
  std::vector<Tensor> tensors_;
};

// Validates shapes against `spec`.
ModelParams FromTensors(const ModelSpec& spec, std::vector<Tensor> tensors);

// Parameters bound onto a tape, in ModelParams::Index order.
struct BoundModel {
  std::vector<ad::Var> vars;
  ad::Var operator[](ModelParams::Index i) const { return vars[i]; }
};

BoundModel Bind(ad::Tape& tape, const ModelParams& params, bool trainable);
BoundModel BindVars(std::vector<ad::Var> vars);

ad::Var ExtractFeatures(const BoundModel& m, ad::Var x);
ad::Var ClassifierLogits(const BoundModel& m, ad::Var features);
ad::Var ProjectionHead(const BoundModel& m, ad::Var features);
// Unit-norm embedding of the projection head output.
ad::Var Embed(const BoundModel& m, ad::Var features);

Tensor ForwardLogits(const ModelParams& params, const Tensor& x);
Tensor ForwardEmbedding(const ModelParams& params, const Tensor& x);

// ---------------------------------------------------------------------------
// Prototypes.

struct PrototypeSet {
  Tensor vectors;  // num_classes x proj_dim, unit rows
};

struct PrototypeOptions {
  int max_steps = 200;
  double step_size = 0.5;
  double stop_tol = 1e-5;
  int max_halvings = 40;
  // Neighbours within this cosine gap of a row's maximum share its descent
  // direction equally.
  double active_tol = 1e-2;
};

// Sum over rows i of max_{j != i} cos(v_i, v_j).
double PrototypeObjective(const Tensor& v);
// Subgradient of PrototypeObjective; the lowest j wins ties in the max.
Tensor PrototypeObjectiveGradient(const Tensor& v);
double MaxPairwiseCosine(const Tensor& v);

struct FinetuneTrace {
  std::vector<double> objective;  // one entry per accepted iterate
  int steps = 0;
};

// Gradient descent with step halving on the objective above. Each iteration
// starts from `step_size`, halves until the objective does not increase, and
// stops when the budget is spent, no step is accepted, or the accepted
// improvement falls below `stop_tol`. Throws ContractError on a zero row or
// fewer than two rows.
Tensor FinetunePrototypes(Tensor v, const PrototypeOptions& options,
                          FinetuneTrace* trace = nullptr);

// Classifier rows pushed through the projection head, fine-tuned, then
// row-normalized.
PrototypeSet DerivePrototypes(const ModelParams& params,
                              const PrototypeOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoints: a one-line JSON manifest followed by the little-endian float64
// payload of every tensor in index order.

void SaveCheckpoint(const ModelParams& params, const std::string& path,
                    const nlohmann::json& metadata = nlohmann::json::object());

struct Checkpoint {
  ModelParams params;
  nlohmann::json metadata;
};

Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace fediic

#endif  // FEDIIC_MODEL_H_
