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

#ifndef FEDIIC_METRICS_H_
#define FEDIIC_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fediic/dataset.h"
#include "fediic/model.h"
#include "fediic/tensor.h"

namespace fediic {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);
  static ConfusionMatrix FromPredictions(std::span<const int> truth,
                                         std::span<const int> predicted,
                                         int num_classes);

  void Add(int truth, int predicted, std::int64_t count = 1);
  int num_classes() const { return num_classes_; }
  std::int64_t operator()(int truth, int predicted) const;
  std::int64_t RowSum(int truth) const;
  // TP_c / (TP_c + FN_c) per class. Throws ContractError on an empty row.
  std::vector<double> Recalls() const;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

double Bacc(const ConfusionMatrix& cm);

struct GroupBacc {
  double minority = 0.0;
  double majority = 0.0;
  double overall = 0.0;
};

// `minority` must be a non-empty proper subset of the classes.
GroupBacc ComputeGroupBacc(const ConfusionMatrix& cm, std::span<const int> minority);

// Row-wise argmax; the lowest class index wins ties.
std::vector<int> ArgmaxRows(const Tensor& logits);

ConfusionMatrix EvaluateModel(const ModelParams& params, const LabeledDataset& data);

// 1-based index of the first round whose value reaches `baseline_best`;
// nullopt when the series never does. Throws ContractError on an empty series.
std::optional<int> RoundsToMatchBaseline(std::span<const double> series,
                                         double baseline_best);
// baseline_rounds / method_rounds, nullopt when the method never matched.
std::optional<double> Speedup(int baseline_rounds, std::optional<int> method_rounds);

}  // namespace fediic

#endif  // FEDIIC_METRICS_H_
