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

#ifndef FEDIIC_OPTIMIZER_H_
#define FEDIIC_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fediic/tensor.h"

namespace fediic {

enum class OptimizerKind { kSgdMomentum, kAdam };

OptimizerKind ParseOptimizerKind(const std::string& name);
std::string ToString(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L2 penalty folded into the gradient (coupled decay).
  double weight_decay = 5e-4;
};

// Per-parameter auxiliary buffers for one training context. Buffers are
// created on the first Step() and mirror the parameter shapes from then on.
//
//   sgd-momentum:  g' = g + wd*p;  b = mu*b + g';  p -= lr*b
//   adam:          g' = g + wd*p;  m = b1*m + (1-b1)*g';  v = b2*v + (1-b2)*g'^2
//                  p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class OptimizerState {
 public:
  explicit OptimizerState(OptimizerConfig config) : config_(config) {}

  void Step(std::span<Tensor> params, std::span<const Tensor> grads);

  const OptimizerConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }
  const std::vector<Tensor>& first_buffers() const { return first_; }
  const std::vector<Tensor>& second_buffers() const { return second_; }

 private:
  OptimizerConfig config_;
  std::vector<Tensor> first_;   // momentum / first moment
  std::vector<Tensor> second_;  // second moment (adam)
  std::int64_t steps_ = 0;
};

}  // namespace fediic

#endif  // FEDIIC_OPTIMIZER_H_
