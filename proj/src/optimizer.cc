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

#include "fediic/optimizer.h"

#include <cmath>

#include "fediic/errors.h"

namespace fediic {

OptimizerKind ParseOptimizerKind(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd" || name == "sgd-momentum") return OptimizerKind::kSgdMomentum;
  throw ConfigError("unknown optimizer '" + name + "' (expected adam|sgd)");
}

std::string ToString(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd-momentum";
}

void OptimizerState::Step(std::span<Tensor> params,
                          std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw StructuralError("optimizer: " + std::to_string(params.size()) +
                          " parameters but " + std::to_string(grads.size()) +
                          " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw StructuralError("optimizer: gradient " + std::to_string(i) +
                            " has shape " + ShapeToString(grads[i].shape()) +
                            ", parameter has " +
                            ShapeToString(params[i].shape()));
    }
  }
  if (first_.empty()) {
    for (const Tensor& p : params) {
      first_.emplace_back(p.shape(), 0.0);
      if (config_.kind == OptimizerKind::kAdam) second_.emplace_back(p.shape(), 0.0);
    }
  } else if (first_.size() != params.size()) {
    throw StructuralError("optimizer: parameter count changed between steps");
  }
  ++steps_;

  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  if (config_.kind == OptimizerKind::kSgdMomentum) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = params[i];
      Tensor& buf = first_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double g = grads[i][j] + wd * p[j];
        buf[j] = config_.momentum * buf[j] + g;
        p[j] -= lr * buf[j];
      }
    }
    return;
  }

  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    Tensor& m = first_[i];
    Tensor& v = second_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = grads[i][j] + wd * p[j];
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.epsilon);
    }
  }
}

}  // namespace fediic
