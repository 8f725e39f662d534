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

// Reverse-mode differentiation over a fixed set of dense primitives.
//
// A Tape records every primitive applied to its Vars in forward order;
// Backward() replays it in reverse and accumulates gradients into every node
// that depends on a leaf. The primitive set is closed:
//
//   MatMul, MatMulTransposed, AddRow, Relu, RowL2Normalize, LogSoftmaxRows
//   (optionally masked), Add, Sub, Mul, Scale, Sum
//
// Constants enter through Tape::Constant and never receive gradients.
// A Tape is single-owner; distinct tapes may be used from distinct threads.

#ifndef FEDIIC_AUTODIFF_H_
#define FEDIIC_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fediic/tensor.h"

namespace fediic::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Leaf(Tensor value);
  Var Constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  // Zero tensor of the node's shape when no gradient reached it.
  const Tensor& grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one value.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend Var MatMul(Var, Var);
  friend Var MatMulTransposed(Var, Var);
  friend Var AddRow(Var, Var);
  friend Var Relu(Var);
  friend Var RowL2Normalize(Var);
  friend Var LogSoftmaxRows(Var, const Tensor*);
  friend Var Add(Var, Var);
  friend Var Sub(Var, Var);
  friend Var Mul(Var, Var);
  friend Var Scale(Var, double);
  friend Var Sum(Var);

  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    BackwardFn backward;
  };

  Var Push(Tensor value, bool requires_grad, BackwardFn backward);
  Tensor& MutableGrad(std::size_t id);
  bool RequiresGrad(std::size_t id) const { return nodes_[id].requires_grad; }

  std::vector<Node> nodes_;
  Tensor empty_grad_;
};

Var MatMul(Var a, Var b);
Var MatMulTransposed(Var a, Var b);
Var AddRow(Var x, Var bias);
Var Relu(Var x);
Var RowL2Normalize(Var x);
// `mask`, when given, must match x's shape; entries with mask == 0 are left
// out of each row's normalizer and produce 0 with zero gradient.
Var LogSoftmaxRows(Var x, const Tensor* mask = nullptr);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
Var Sum(Var a);

// ---------------------------------------------------------------------------
// Whole-expression helpers.

// Builds a scalar loss on `tape` from Vars bound to the given leaves.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> leaves)>;

struct Evaluation {
  double value = 0.0;
  std::vector<Tensor> gradients;  // one per leaf, same shapes
};

Evaluation EvaluateWithGradients(const LossBuilder& build,
                                 std::span<const Tensor> leaves);
double EvaluateLoss(const LossBuilder& build, std::span<const Tensor> leaves);

struct GradientCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Per leaf the relative error is max_i |a_i - n_i| / max(|a|_inf, |n|_inf, floor).
  double floor = 1e-6;
};

struct GradientCheckReport {
  std::vector<double> max_relative_error;   // per leaf
  std::vector<std::size_t> worst_entry;     // per leaf, flat index
  double tolerance = 0.0;

  bool passed() const;
  std::vector<std::size_t> flagged_leaves() const;
  double overall_max() const;
};

// Central finite differences against the tape's own gradients.
GradientCheckReport FiniteDifferenceCheck(const LossBuilder& build,
                                          std::span<const Tensor> leaves,
                                          const GradientCheckOptions& options);

// Central finite differences against caller-supplied gradients.
GradientCheckReport CompareWithFiniteDifferences(
    const LossBuilder& build, std::span<const Tensor> leaves,
    std::span<const Tensor> analytic, const GradientCheckOptions& options);

// Central-difference gradient of `build` at `leaves`.
std::vector<Tensor> NumericGradients(const LossBuilder& build,
                                     std::span<const Tensor> leaves,
                                     double step);

}  // namespace fediic::ad

#endif  // FEDIIC_AUTODIFF_H_
