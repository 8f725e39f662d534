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

#include "fediic/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fediic/errors.h"

namespace fediic::ad {

const Tensor& Var::value() const { return tape_->value(*this); }
const Tensor& Var::grad() const { return tape_->grad(*this); }

Var Tape::Leaf(Tensor value) { return Push(std::move(value), true, nullptr); }

Var Tape::Constant(Tensor value) {
  return Push(std::move(value), false, nullptr);
}

Var Tape::Push(Tensor value, bool requires_grad, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad_ready) return n.grad;
  // Lazily materialized zero gradient; kept in a member so the reference
  // stays valid.
  auto& self = const_cast<Tape&>(*this);
  self.nodes_[v.id()].grad = Tensor(n.value.shape(), 0.0);
  self.nodes_[v.id()].grad_ready = true;
  return nodes_[v.id()].grad;
}

Tensor& Tape::MutableGrad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.grad_ready = true;
  }
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (&loss.tape() != this) throw StructuralError("backward: foreign Var");
  if (!nodes_[loss.id()].value.is_scalar()) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        ShapeToString(nodes_[loss.id()].value.shape()));
  }
  for (Node& n : nodes_) {
    n.grad_ready = false;
    n.grad = Tensor();
  }
  MutableGrad(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad_ready || !n.requires_grad || !n.backward) continue;
    n.backward(*this, i);
  }
}

namespace {

void SameTape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw StructuralError(std::string(op) + ": operands live on different tapes");
  }
}

void SameShape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw StructuralError(std::string(op) + ": shape mismatch " +
                          ShapeToString(a.shape()) + " vs " +
                          ShapeToString(b.shape()));
  }
}

}  // namespace

Var MatMul(Var a, Var b) {
  SameTape(a, b, "matmul");
  Tape& t = a.tape();
  Tensor out = kernels::MatMul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = t.RequiresGrad(ia) || t.RequiresGrad(ib);
  return t.Push(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    const Tensor& av = tp.nodes_[ia].value;
    const Tensor& bv = tp.nodes_[ib].value;
    const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
    if (tp.RequiresGrad(ia)) {
      Tensor& ga = tp.MutableGrad(ia);
      // dA = G * B^T
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += g(i, j) * bv(p, j);
          ga(i, p) += s;
        }
    }
    if (tp.RequiresGrad(ib)) {
      Tensor& gb = tp.MutableGrad(ib);
      // dB = A^T * G
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double a_ip = av(i, p);
          for (std::size_t j = 0; j < m; ++j) gb(p, j) += a_ip * g(i, j);
        }
    }
  });
}

Var MatMulTransposed(Var a, Var b) {
  SameTape(a, b, "matmul_transposed");
  Tape& t = a.tape();
  Tensor out = kernels::MatMulTransposed(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = t.RequiresGrad(ia) || t.RequiresGrad(ib);
  return t.Push(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    const Tensor& av = tp.nodes_[ia].value;
    const Tensor& bv = tp.nodes_[ib].value;
    const std::size_t n = av.rows(), k = av.cols(), m = bv.rows();
    // out(i,j) = sum_p a(i,p) b(j,p); the same node may feed both sides.
    if (tp.RequiresGrad(ia)) {
      Tensor& ga = tp.MutableGrad(ia);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) ga(i, p) += gij * bv(j, p);
        }
    }
    if (tp.RequiresGrad(ib)) {
      Tensor& gb = tp.MutableGrad(ib);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) gb(j, p) += gij * av(i, p);
        }
    }
  });
}

Var AddRow(Var x, Var bias) {
  SameTape(x, bias, "add_row");
  Tape& t = x.tape();
  Tensor out = kernels::AddRow(x.value(), bias.value());
  const std::size_t ix = x.id(), ibias = bias.id();
  const bool rg = t.RequiresGrad(ix) || t.RequiresGrad(ibias);
  return t.Push(std::move(out), rg, [ix, ibias](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    if (tp.RequiresGrad(ix)) {
      Tensor& gx = tp.MutableGrad(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (tp.RequiresGrad(ibias)) {
      Tensor& gb = tp.MutableGrad(ibias);
      const std::size_t m = g.cols();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t j = 0; j < m; ++j) gb[j] += g(r, j);
    }
  });
}

Var Relu(Var x) {
  Tape& t = x.tape();
  Tensor out = kernels::Relu(x.value());
  const std::size_t ix = x.id();
  return t.Push(std::move(out), t.RequiresGrad(ix),
                [ix](Tape& tp, std::size_t self) {
                  const Tensor& g = tp.nodes_[self].grad;
                  const Tensor& in = tp.nodes_[ix].value;
                  Tensor& gx = tp.MutableGrad(ix);
                  for (std::size_t i = 0; i < g.size(); ++i)
                    if (in[i] > 0.0) gx[i] += g[i];
                });
}

Var RowL2Normalize(Var x) {
  Tape& t = x.tape();
  const Tensor& in = x.value();
  Tensor out = kernels::RowL2Normalize(in);
  std::vector<double> norms(in.rows());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    double sq = 0.0;
    for (double v : in.row(r)) sq += v * v;
    norms[r] = std::sqrt(sq);
  }
  const std::size_t ix = x.id();
  return t.Push(std::move(out), t.RequiresGrad(ix),
                [ix, norms = std::move(norms)](Tape& tp, std::size_t self) {
                  const Tensor& g = tp.nodes_[self].grad;
                  const Tensor& y = tp.nodes_[self].value;
                  Tensor& gx = tp.MutableGrad(ix);
                  const std::size_t m = y.cols();
                  for (std::size_t r = 0; r < y.rows(); ++r) {
                    if (norms[r] == 0.0) continue;  // zero row: zero gradient
                    double dot = 0.0;
                    for (std::size_t j = 0; j < m; ++j) dot += y(r, j) * g(r, j);
                    const double inv = 1.0 / norms[r];
                    for (std::size_t j = 0; j < m; ++j)
                      gx(r, j) += (g(r, j) - y(r, j) * dot) * inv;
                  }
                });
}

Var LogSoftmaxRows(Var x, const Tensor* mask) {
  Tape& t = x.tape();
  Tensor out = kernels::LogSoftmaxRows(x.value(), mask);
  const std::size_t ix = x.id();
  Tensor mask_copy = mask ? *mask : Tensor();
  const bool has_mask = mask != nullptr;
  return t.Push(
      std::move(out), t.RequiresGrad(ix),
      [ix, has_mask, mask_copy = std::move(mask_copy)](Tape& tp,
                                                      std::size_t self) {
        const Tensor& g = tp.nodes_[self].grad;
        const Tensor& y = tp.nodes_[self].value;
        Tensor& gx = tp.MutableGrad(ix);
        const std::size_t m = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          double gsum = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            if (has_mask && mask_copy(r, j) == 0.0) continue;
            gsum += g(r, j);
          }
          for (std::size_t j = 0; j < m; ++j) {
            if (has_mask && mask_copy(r, j) == 0.0) continue;
            gx(r, j) += g(r, j) - std::exp(y(r, j)) * gsum;
          }
        }
      });
}

Var Add(Var a, Var b) {
  SameTape(a, b, "add");
  SameShape(a, b, "add");
  Tape& t = a.tape();
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = t.RequiresGrad(ia) || t.RequiresGrad(ib);
  return t.Push(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    for (std::size_t id : {ia, ib}) {
      if (!tp.RequiresGrad(id)) continue;
      Tensor& gi = tp.MutableGrad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var Sub(Var a, Var b) {
  SameTape(a, b, "sub");
  SameShape(a, b, "sub");
  Tape& t = a.tape();
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = t.RequiresGrad(ia) || t.RequiresGrad(ib);
  return t.Push(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    if (tp.RequiresGrad(ia)) {
      Tensor& ga = tp.MutableGrad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.RequiresGrad(ib)) {
      Tensor& gb = tp.MutableGrad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  SameTape(a, b, "mul");
  SameShape(a, b, "mul");
  Tape& t = a.tape();
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = t.RequiresGrad(ia) || t.RequiresGrad(ib);
  return t.Push(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.nodes_[self].grad;
    if (tp.RequiresGrad(ia)) {
      const Tensor& bv = tp.nodes_[ib].value;
      Tensor& ga = tp.MutableGrad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.RequiresGrad(ib)) {
      const Tensor& av = tp.nodes_[ia].value;
      Tensor& gb = tp.MutableGrad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Scale(Var a, double factor) {
  Tape& t = a.tape();
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  const std::size_t ia = a.id();
  return t.Push(std::move(out), t.RequiresGrad(ia),
                [ia, factor](Tape& tp, std::size_t self) {
                  const Tensor& g = tp.nodes_[self].grad;
                  Tensor& ga = tp.MutableGrad(ia);
                  for (std::size_t i = 0; i < g.size(); ++i)
                    ga[i] += g[i] * factor;
                });
}

Var Sum(Var a) {
  Tape& t = a.tape();
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  return t.Push(Tensor::Scalar(s), t.RequiresGrad(ia),
                [ia](Tape& tp, std::size_t self) {
                  const double g = tp.nodes_[self].grad[0];
                  Tensor& ga = tp.MutableGrad(ia);
                  for (double& v : ga.values()) v += g;
                });
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Var> BindLeaves(Tape& tape, std::span<const Tensor> leaves) {
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const Tensor& t : leaves) vars.push_back(tape.Leaf(t));
  return vars;
}

Var BuildChecked(const LossBuilder& build, Tape& tape,
                 std::span<const Var> vars) {
  Var loss = build(tape, vars);
  if (!loss.value().is_scalar()) {
    throw ContractError("loss expression must be scalar, got shape " +
                        ShapeToString(loss.shape()));
  }
  return loss;
}

}  // namespace

Evaluation EvaluateWithGradients(const LossBuilder& build,
                                 std::span<const Tensor> leaves) {
  Tape tape;
  std::vector<Var> vars = BindLeaves(tape, leaves);
  Var loss = BuildChecked(build, tape, vars);
  tape.Backward(loss);
  Evaluation ev;
  ev.value = loss.value()[0];
  ev.gradients.reserve(vars.size());
  for (Var v : vars) ev.gradients.push_back(tape.grad(v));
  return ev;
}

double EvaluateLoss(const LossBuilder& build, std::span<const Tensor> leaves) {
  Tape tape;
  std::vector<Var> vars = BindLeaves(tape, leaves);
  return BuildChecked(build, tape, vars).value()[0];
}

std::vector<Tensor> NumericGradients(const LossBuilder& build,
                                     std::span<const Tensor> leaves,
                                     double step) {
  if (!(step > 0.0)) throw ContractError("finite-difference step must be > 0");
  std::vector<Tensor> work(leaves.begin(), leaves.end());
  std::vector<Tensor> grads;
  grads.reserve(work.size());
  for (std::size_t l = 0; l < work.size(); ++l) {
    Tensor g(work[l].shape(), 0.0);
    for (std::size_t i = 0; i < work[l].size(); ++i) {
      const double orig = work[l][i];
      work[l][i] = orig + step;
      const double plus = EvaluateLoss(build, work);
      work[l][i] = orig - step;
      const double minus = EvaluateLoss(build, work);
      work[l][i] = orig;
      g[i] = (plus - minus) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradientCheckReport CompareWithFiniteDifferences(
    const LossBuilder& build, std::span<const Tensor> leaves,
    std::span<const Tensor> analytic, const GradientCheckOptions& options) {
  if (analytic.size() != leaves.size()) {
    throw StructuralError("gradient check: one gradient per leaf required");
  }
  std::vector<Tensor> numeric = NumericGradients(build, leaves, options.step);
  GradientCheckReport report;
  report.tolerance = options.tolerance;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    if (analytic[l].shape() != leaves[l].shape()) {
      throw StructuralError("gradient check: gradient shape mismatch for leaf " +
                            std::to_string(l));
    }
    double worst_diff = 0.0, scale = options.floor;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < leaves[l].size(); ++i) {
      const double a = analytic[l][i], n = numeric[l][i];
      const double diff = std::abs(a - n);
      scale = std::max({scale, std::abs(a), std::abs(n)});
      if (diff > worst_diff || !std::isfinite(diff)) {
        worst_diff = std::isfinite(diff) ? diff : INFINITY;
        worst_i = i;
      }
    }
    const double worst = std::isfinite(scale) ? worst_diff / scale : INFINITY;
    report.max_relative_error.push_back(worst);
    report.worst_entry.push_back(worst_i);
  }
  return report;
}

GradientCheckReport FiniteDifferenceCheck(const LossBuilder& build,
                                          std::span<const Tensor> leaves,
                                          const GradientCheckOptions& options) {
  Evaluation ev = EvaluateWithGradients(build, leaves);
  return CompareWithFiniteDifferences(build, leaves, ev.gradients, options);
}

bool GradientCheckReport::passed() const { return flagged_leaves().empty(); }

std::vector<std::size_t> GradientCheckReport::flagged_leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < max_relative_error.size(); ++i)
    if (!(max_relative_error[i] < tolerance)) out.push_back(i);
  return out;
}

double GradientCheckReport::overall_max() const {
  double m = 0.0;
  for (double e : max_relative_error) m = std::max(m, e);
  return m;
}

}  // namespace fediic::ad
