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

#include "fediic/metrics.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "fediic/errors.h"

namespace fediic {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 1) throw ContractError("confusion matrix needs >= 1 class");
  counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

ConfusionMatrix ConfusionMatrix::FromPredictions(std::span<const int> truth,
                                                 std::span<const int> predicted,
                                                 int num_classes) {
  if (truth.size() != predicted.size()) {
    throw StructuralError("confusion matrix: " + std::to_string(truth.size()) +
                          " labels but " + std::to_string(predicted.size()) +
                          " predictions");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.Add(truth[i], predicted[i]);
  return cm;
}

void ConfusionMatrix::Add(int truth, int predicted, std::int64_t count) {
  if (truth < 0 || truth >= num_classes_ || predicted < 0 ||
      predicted >= num_classes_) {
    throw ContractError("confusion matrix: class index out of range");
  }
  if (count < 0) throw ContractError("confusion matrix: negative count");
  counts_[static_cast<std::size_t>(truth) * num_classes_ + predicted] += count;
}

std::int64_t ConfusionMatrix::operator()(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * num_classes_ + predicted);
}

std::int64_t ConfusionMatrix::RowSum(int truth) const {
  auto begin = counts_.begin() + static_cast<std::ptrdiff_t>(truth) * num_classes_;
  return std::accumulate(begin, begin + num_classes_, std::int64_t{0});
}

std::vector<double> ConfusionMatrix::Recalls() const {
  std::vector<double> recalls;
  for (int c = 0; c < num_classes_; ++c) {
    const std::int64_t row = RowSum(c);
    if (row == 0) {
      throw ContractError("balanced accuracy: class " + std::to_string(c) +
                          " has no samples");
    }
    recalls.push_back(static_cast<double>((*this)(c, c)) / static_cast<double>(row));
  }
  return recalls;
}

double Bacc(const ConfusionMatrix& cm) {
  const auto r = cm.Recalls();
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

GroupBacc ComputeGroupBacc(const ConfusionMatrix& cm, std::span<const int> minority) {
  const int L = cm.num_classes();
  std::vector<bool> is_minor(static_cast<std::size_t>(L), false);
  for (int c : minority) {
    if (c < 0 || c >= L) throw ContractError("group bacc: class out of range");
    is_minor[static_cast<std::size_t>(c)] = true;
  }
  const auto n_minor = std::count(is_minor.begin(), is_minor.end(), true);
  if (n_minor == 0 || n_minor == L) {
    throw ContractError("group bacc: minority set must be a non-empty proper subset");
  }
  const auto r = cm.Recalls();
  double minor_sum = 0.0, major_sum = 0.0;
  for (int c = 0; c < L; ++c)
    (is_minor[static_cast<std::size_t>(c)] ? minor_sum : major_sum) += r[static_cast<std::size_t>(c)];
  GroupBacc g;
  g.minority = minor_sum / static_cast<double>(n_minor);
  g.majority = major_sum / static_cast<double>(L - n_minor);
  g.overall = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(L);
  return g;
}

std::vector<int> ArgmaxRows(const Tensor& logits) {
  std::vector<int> out;
  out.reserve(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    // max_element returns the first maximum.
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

ConfusionMatrix EvaluateModel(const ModelParams& params, const LabeledDataset& data) {
  if (data.num_classes != params.spec().num_classes) {
    throw DataError("evaluate: dataset has " + std::to_string(data.num_classes) +
                    " classes, model expects " +
                    std::to_string(params.spec().num_classes));
  }
  if (data.dim != params.spec().input_dim) {
    throw DataError("evaluate: dataset has " + std::to_string(data.dim) +
                    " features, model expects " +
                    std::to_string(params.spec().input_dim));
  }
  const auto predicted = ArgmaxRows(ForwardLogits(params, data.AllFeatures()));
  return ConfusionMatrix::FromPredictions(data.labels, predicted, data.num_classes);
}

std::optional<int> RoundsToMatchBaseline(std::span<const double> series,
                                         double baseline_best) {
  if (series.empty()) throw ContractError("efficiency: empty series");
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] >= baseline_best) return static_cast<int>(i + 1);
  return std::nullopt;
}

std::optional<double> Speedup(int baseline_rounds, std::optional<int> method_rounds) {
  if (!method_rounds) return std::nullopt;
  if (*method_rounds <= 0 || baseline_rounds <= 0) {
    throw ContractError("efficiency: round counts must be positive");
  }
  return static_cast<double>(baseline_rounds) / static_cast<double>(*method_rounds);
}

}  // namespace fediic
