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

#include "fediic/losses.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fediic/errors.h"

namespace fediic {

void LossConfig::Validate() const {
  if (!(tau > 0.0)) throw ConfigError("loss: tau must be > 0");
  if (!(t >= 0.0)) throw ConfigError("loss: t must be >= 0");
  if (!(q >= 0.0)) throw ConfigError("loss: q must be >= 0");
  if (!(k1 >= 0.0) || !(k2 >= 0.0)) throw ConfigError("loss: k1, k2 must be >= 0");
}

std::vector<double> SmoothedPrior(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw ContractError("smoothed prior of zero classes");
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw ContractError("negative class count");
    total += c;
  }
  const double denom = static_cast<double>(total) + static_cast<double>(counts.size());
  std::vector<double> p;
  p.reserve(counts.size());
  for (std::int64_t c : counts) p.push_back((static_cast<double>(c) + 1.0) / denom);
  return p;
}

MarginTable MarginsFromPriors(std::span<const double> priors,
                              std::span<const double> mean_losses, double q) {
  if (priors.size() != mean_losses.size()) {
    throw StructuralError("margins: " + std::to_string(priors.size()) +
                          " priors but " + std::to_string(mean_losses.size()) +
                          " mean losses");
  }
  MarginTable table;
  table.priors.assign(priors.begin(), priors.end());
  table.mean_losses.assign(mean_losses.begin(), mean_losses.end());
  for (std::size_t y = 0; y < priors.size(); ++y) {
    if (!(priors[y] > 0.0)) throw ContractError("margins: non-positive prior");
    const double loss = std::max(mean_losses[y], kMeanLossFloor);
    table.margins.push_back(std::log(priors[y]) - q * std::log(loss));
  }
  return table;
}

MarginTable DalaMargins(std::span<const std::int64_t> counts,
                        std::span<const double> mean_losses, double q) {
  if (std::all_of(counts.begin(), counts.end(), [](std::int64_t c) { return c == 0; }))
    throw ContractError("margins: every class count is zero");
  return MarginsFromPriors(SmoothedPrior(counts), mean_losses, q);
}

MarginTable DalaMarginsFromTotals(std::span<const std::int64_t> counts,
                                  std::span<const double> loss_totals, double q) {
  if (counts.size() != loss_totals.size()) {
    throw StructuralError("margins: counts and loss totals differ in length");
  }
  std::vector<double> mean(counts.size(), 1.0);
  for (std::size_t y = 0; y < counts.size(); ++y)
    if (counts[y] > 0) mean[y] = loss_totals[y] / static_cast<double>(counts[y]);
  return DalaMargins(counts, mean, q);
}

MarginTable ZeroMargins(int num_classes) {
  const auto L = static_cast<std::size_t>(num_classes);
  MarginTable table;
  table.margins.assign(L, 0.0);
  table.priors.assign(L, 1.0 / static_cast<double>(num_classes));
  table.mean_losses.assign(L, 1.0);
  return table;
}

double DynamicTemperature(double p_i, double p_j, double tau, double t) {
  if (!(p_i > 0.0) || !(p_j > 0.0)) {
    throw ContractError("dynamic temperature: priors must be > 0");
  }
  if (!(tau > 0.0)) throw ContractError("dynamic temperature: tau must be > 0");
  return std::pow(p_i * p_j, t) * tau;
}

namespace {

void CheckLabels(std::span<const int> labels, std::size_t rows, int num_classes,
                 const char* op) {
  if (labels.size() != rows) {
    throw StructuralError(std::string(op) + ": " + std::to_string(rows) +
                          " rows but " + std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || (num_classes > 0 && y >= num_classes)) {
      throw ContractError(std::string(op) + ": label " + std::to_string(y) +
                          " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

// sum_i -1/|P(i)| sum_{p in P(i)} log softmax_{a != i}(z_i . z_a * s_ia)_p
ad::Var ContrastiveSum(ad::Var z, std::span<const int> labels,
                       const Tensor& inv_temp) {
  ad::Tape& tape = z.tape();
  const std::size_t n = z.shape()[0];
  Tensor mask({n, n}, 1.0);
  Tensor weights({n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    mask(i, i) = 0.0;
    std::size_t positives = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) ++positives;
    if (positives == 0) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i])
        weights(i, j) = -1.0 / static_cast<double>(positives);
  }
  ad::Var sim = ad::Mul(ad::MatMulTransposed(z, z), tape.Constant(inv_temp));
  ad::Var logp = ad::LogSoftmaxRows(sim, &mask);
  return ad::Sum(ad::Mul(tape.Constant(std::move(weights)), logp));
}

std::size_t RowsOf(ad::Var v, const char* op) {
  if (v.shape().size() != 2) {
    throw StructuralError(std::string(op) + ": expected a matrix, got " +
                          ShapeToString(v.shape()));
  }
  return v.shape()[0];
}

}  // namespace

ad::Var SclLoss(ad::Var z, std::span<const int> labels, double tau) {
  if (!(tau > 0.0)) throw ContractError("scl: tau must be > 0");
  const std::size_t n = RowsOf(z, "scl");
  CheckLabels(labels, n, 0, "scl");
  return ContrastiveSum(z, labels, Tensor({n, n}, 1.0 / tau));
}

ad::Var IntraLoss(ad::Var z, std::span<const int> labels,
                  std::span<const double> prior, double tau, double t) {
  const std::size_t n = RowsOf(z, "intra");
  CheckLabels(labels, n, static_cast<int>(prior.size()), "intra");
  Tensor inv_temp({n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p_i = prior[static_cast<std::size_t>(labels[i])];
      const double p_j = prior[static_cast<std::size_t>(labels[j])];
      inv_temp(i, j) = 1.0 / DynamicTemperature(p_i, p_j, tau, t);
    }
  }
  return ContrastiveSum(z, labels, inv_temp);
}

ad::Var InterLoss(ad::Var z, std::span<const int> labels,
                  const Tensor& prototypes, double tau) {
  if (!(tau > 0.0)) throw ContractError("inter: tau must be > 0");
  const std::size_t n = RowsOf(z, "inter");
  if (prototypes.rank() != 2 || prototypes.cols() != z.shape()[1]) {
    throw StructuralError("inter: prototype shape " +
                          ShapeToString(prototypes.shape()) +
                          " does not match embedding shape " +
                          ShapeToString(z.shape()));
  }
  const auto L = prototypes.rows();
  CheckLabels(labels, n, static_cast<int>(L), "inter");
  std::vector<std::size_t> class_size(L, 0);
  for (int y : labels) ++class_size[static_cast<std::size_t>(y)];
  Tensor weights({n, L}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    weights(i, y) = -1.0 / static_cast<double>(class_size[y]);
  }
  ad::Tape& tape = z.tape();
  ad::Var logits = ad::Scale(ad::MatMulTransposed(z, tape.Constant(prototypes)),
                             1.0 / tau);
  ad::Var logp = ad::LogSoftmaxRows(logits);
  return ad::Sum(ad::Mul(tape.Constant(std::move(weights)), logp));
}

ad::Var CeLoss(ad::Var logits, std::span<const int> labels) {
  const std::size_t n = RowsOf(logits, "ce");
  const std::size_t L = logits.shape()[1];
  CheckLabels(labels, n, static_cast<int>(L), "ce");
  Tensor weights({n, L}, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    weights(i, static_cast<std::size_t>(labels[i])) = -1.0 / static_cast<double>(n);
  ad::Var logp = ad::LogSoftmaxRows(logits);
  return ad::Sum(ad::Mul(logits.tape().Constant(std::move(weights)), logp));
}

ad::Var DalaLoss(ad::Var logits, std::span<const int> labels,
                 const MarginTable& margins) {
  RowsOf(logits, "dala");
  if (margins.size() != logits.shape()[1]) {
    throw StructuralError("dala: " + std::to_string(margins.size()) +
                          " margins for " + std::to_string(logits.shape()[1]) +
                          " classes");
  }
  ad::Var offsets = logits.tape().Constant(Tensor::Vector(margins.margins));
  return CeLoss(ad::AddRow(logits, offsets), labels);
}

ad::Var TotalLoss(ad::Var dala, const ad::Var* intra, const ad::Var* inter,
                  const LossConfig& config) {
  ad::Var total = dala;
  if (intra) total = ad::Add(total, ad::Scale(*intra, config.k1));
  if (inter) total = ad::Add(total, ad::Scale(*inter, config.k2));
  return total;
}

}  // namespace fediic
