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

#ifndef FEDIIC_TENSOR_H_
#define FEDIIC_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fediic {

using Shape = std::vector<std::size_t>;

// Dense row-major array of doubles. Scalars are rank-1 tensors of length 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double value);
  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  // Matrix view: rank-2 tensors only (StructuralError otherwise).
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& data() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * shape_[1] + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * shape_[1] + c];
  }

  std::span<const double> row(std::size_t r) const;
  std::span<double> row(std::size_t r);

  bool is_scalar() const { return values_.size() == 1; }
  bool all_finite() const;
  void fill(double value);

  // Bit-exact comparison of shape and every value.
  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

std::string ShapeToString(const Shape& shape);
std::size_t ShapeProduct(const Shape& shape);

// Plain forward kernels shared by the tape and by inference code paths.
namespace kernels {

// (n x k) * (k x m)
Tensor MatMul(const Tensor& a, const Tensor& b);
// (n x k) * (m x k)^T
Tensor MatMulTransposed(const Tensor& a, const Tensor& b);
// (n x m) + bias(m) broadcast over rows
Tensor AddRow(const Tensor& x, const Tensor& bias);
Tensor Relu(const Tensor& x);
// Zero rows stay zero.
Tensor RowL2Normalize(const Tensor& x);
// Row-wise log-softmax restricted to entries with mask != 0; masked-out
// entries are reported as 0. An empty mask pointer means "all entries".
Tensor LogSoftmaxRows(const Tensor& x, const Tensor* mask = nullptr);

}  // namespace kernels

}  // namespace fediic

#endif  // FEDIIC_TENSOR_H_
