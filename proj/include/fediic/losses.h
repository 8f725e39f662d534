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

// Training objectives. Contrastive terms are sums over the batch; the
// cross-entropy family is a batch mean.

#ifndef FEDIIC_LOSSES_H_
#define FEDIIC_LOSSES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fediic/autodiff.h"
#include "fediic/tensor.h"

namespace fediic {

struct LossConfig {
  double tau = 0.1;
  double t = 0.5;   // temperature zoom exponent
  double q = 0.25;  // difficulty exponent of the margins
  double k1 = 1.0;  // intra-client weight
  double k2 = 1.0;  // inter-client weight

  void Validate() const;
};

// Per-class additive logit offsets m_y = log(p(y) / max(l(y), 1e-3)^q).
struct MarginTable {
  std::vector<double> margins;
  std::vector<double> priors;
  std::vector<double> mean_losses;

  std::size_t size() const { return margins.size(); }
};

inline constexpr double kMeanLossFloor = 1e-3;

// (count_y + 1) / (total + L).
std::vector<double> SmoothedPrior(std::span<const std::int64_t> counts);

MarginTable MarginsFromPriors(std::span<const double> priors,
                              std::span<const double> mean_losses, double q);
// Prior from smoothed `counts`. Throws ContractError when every count is 0.
MarginTable DalaMargins(std::span<const std::int64_t> counts,
                        std::span<const double> mean_losses, double q);
// Mean losses are totals / counts; classes without samples get 1.
MarginTable DalaMarginsFromTotals(std::span<const std::int64_t> counts,
                                  std::span<const double> loss_totals, double q);
MarginTable ZeroMargins(int num_classes);

// (p_i p_j)^t tau. Throws ContractError on a non-positive prior.
double DynamicTemperature(double p_i, double p_j, double tau, double t);

// `z` holds unit-norm rows of the multiviewed batch.
ad::Var SclLoss(ad::Var z, std::span<const int> labels, double tau);
// Pairwise temperatures from `prior` (indexed by class). Throws ContractError
// when a batch class has no positive prior.
ad::Var IntraLoss(ad::Var z, std::span<const int> labels,
                  std::span<const double> prior, double tau, double t);
// Cross-entropy of each embedding against the prototype rows, weighted by
// 1 / (number of same-class batch members, anchor included).
ad::Var InterLoss(ad::Var z, std::span<const int> labels,
                  const Tensor& prototypes, double tau);

ad::Var CeLoss(ad::Var logits, std::span<const int> labels);
ad::Var DalaLoss(ad::Var logits, std::span<const int> labels,
                 const MarginTable& margins);

// dala + k1 * intra + k2 * inter; absent terms are skipped.
ad::Var TotalLoss(ad::Var dala, const ad::Var* intra, const ad::Var* inter,
                  const LossConfig& config);

}  // namespace fediic

#endif  // FEDIIC_LOSSES_H_
