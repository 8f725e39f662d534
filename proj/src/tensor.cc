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

#include "fediic/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "fediic/errors.h"

namespace fediic {

std::size_t ShapeProduct(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void ValidateShape(const Shape& shape) {
  if (shape.empty()) throw StructuralError("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) {
      throw StructuralError("tensor shape " + ShapeToString(shape) +
                            " has a zero extent");
    }
  }
}

void RequireMatrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw StructuralError(std::string(op) + ": expected a matrix, got shape " +
                          ShapeToString(t.shape()));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  ValidateShape(shape_);
  values_.assign(ShapeProduct(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  ValidateShape(shape_);
  if (values_.size() != ShapeProduct(shape_)) {
    throw StructuralError("tensor of shape " + ShapeToString(shape_) +
                          " needs " + std::to_string(ShapeProduct(shape_)) +
                          " values, got " + std::to_string(values_.size()));
  }
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  RequireMatrix(*this, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  RequireMatrix(*this, "cols");
  return shape_[1];
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(values_).subspan(r * c, c);
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(values_).subspan(r * c, c);
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) {
  std::fill(values_.begin(), values_.end(), value);
}

namespace kernels {

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "matmul");
  RequireMatrix(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw StructuralError("matmul: inner dimensions differ: " +
                          ShapeToString(a.shape()) + " x " +
                          ShapeToString(b.shape()));
  }
  Tensor out({n, m});
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor MatMulTransposed(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "matmul_transposed");
  RequireMatrix(b, "matmul_transposed");
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  if (b.cols() != k) {
    throw StructuralError("matmul_transposed: row lengths differ: " +
                          ShapeToString(a.shape()) + " x " +
                          ShapeToString(b.shape()) + "^T");
  }
  Tensor out({n, m});
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += pa[i * k + p] * pb[j * k + p];
      out(i, j) = s;
    }
  }
  return out;
}

Tensor AddRow(const Tensor& x, const Tensor& bias) {
  RequireMatrix(x, "add_row");
  if (bias.rank() != 1 || bias.size() != x.cols()) {
    throw StructuralError("add_row: bias shape " + ShapeToString(bias.shape()) +
                          " does not match matrix " + ShapeToString(x.shape()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  return out;
}

Tensor Relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor RowL2Normalize(const Tensor& x) {
  RequireMatrix(x, "row_l2_normalize");
  Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = out.row(i);
    double sq = 0.0;
    for (double v : r) sq += v * v;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : r) v *= inv;
  }
  return out;
}

Tensor LogSoftmaxRows(const Tensor& x, const Tensor* mask) {
  RequireMatrix(x, "log_softmax");
  if (mask != nullptr && mask->shape() != x.shape()) {
    throw StructuralError("log_softmax: mask shape " +
                          ShapeToString(mask->shape()) + " != input shape " +
                          ShapeToString(x.shape()));
  }
  Tensor out(x.shape(), 0.0);
  const std::size_t m = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto in = x.row(i);
    auto o = out.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (mask && (*mask)(i, j) == 0.0) continue;
      mx = std::max(mx, in[j]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask && (*mask)(i, j) == 0.0) continue;
      s += std::exp(in[j] - mx);
    }
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < m; ++j) {
      if (mask && (*mask)(i, j) == 0.0) continue;
      o[j] = in[j] - lse;
    }
  }
  return out;
}

}  // namespace kernels

}  // namespace fediic
