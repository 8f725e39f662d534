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

// Client partitioning (U / L / L^2 distributions) and the imbalance and
// concentration metrics used to audit a split.

#ifndef FEDIIC_PARTITION_H_
#define FEDIIC_PARTITION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fediic/dataset.h"
#include "json.hpp"

namespace fediic {

struct PartitionConfig {
  int num_clients = 20;
  double alpha_minor = 50.0;  // Dirichlet concentration for minority classes
  double alpha_major = 0.1;   // ... and for majority classes
  std::vector<int> minor_classes;
  // Sort each class's sampled client proportions in descending order before
  // allocation, so client 0 receives the largest share of every class.
  bool agglomerate = true;
  std::uint64_t seed = 0;

  void Validate(int num_classes) const;
};

struct PartitionResult {
  // Disjoint sample-index sets, one per client, covering the dataset.
  std::vector<std::vector<std::size_t>> clients;
  // L x K realized share of each class held by each client. Rows of classes
  // without samples are all zero and listed in `empty_classes`.
  std::vector<std::vector<double>> shares;
  std::vector<int> empty_classes;

  std::size_t num_clients() const { return clients.size(); }
  std::vector<std::size_t> ClientSizes() const;
};

struct ImbalanceReport {
  double global_gamma = 1.0;
  std::vector<double> per_client_gamma;      // +inf when a class is missing
  std::vector<double> per_class_conc;        // +inf when one client has all,
                                             // NaN for empty classes
  std::vector<bool> per_class_concentrated;  // concentration test per class
};

// p^i = count_i / total over the given labels.
std::vector<double> ClassPrior(std::span<const int> labels, int num_classes);
std::vector<double> ClassPrior(const LabeledDataset& dataset,
                               std::span<const std::size_t> subset);
std::vector<double> PriorFromCounts(std::span<const std::int64_t> counts);

// max(p) / min(p); +inf when any entry is zero.
double ImbalanceDegree(std::span<const double> prior);

// 1 / H(shares) with natural-log entropy and 0 log 0 := 0; +inf for a
// one-hot share vector.
double ConcentrationDegree(std::span<const double> shares);

// `shares` ordered by client data size ascending. True iff non-decreasing.
bool IsConcentrated(std::span<const double> shares_by_ascending_size);

// Client indices ordered by realized data size ascending; among equal sizes
// the higher index comes first (the reverse of a stable descending sort).
std::vector<std::size_t> ClientsByAscendingSize(const PartitionResult& result);

// Splits `counts` into integers proportional to `proportions` using the
// largest-remainder method; ties on remainders go to the lower index.
std::vector<std::int64_t> LargestRemainder(std::int64_t total,
                                           std::span<const double> proportions);

std::vector<double> SampleDirichlet(int k, double alpha, std::uint64_t seed);

// Every class independently: proportions ~ Dir(alpha), samples assigned by
// largest-remainder counts.
PartitionResult DirichletPartition(const LabeledDataset& dataset,
                                   int num_clients, double alpha,
                                   std::uint64_t seed);

struct L2PartitionOutput {
  PartitionResult partition;
  ImbalanceReport report;
};

// Minor classes use Dir(alpha_minor), major classes Dir(alpha_major); with
// agglomeration the proportion vectors are sorted descending.
L2PartitionOutput L2Partition(const LabeledDataset& dataset,
                              const PartitionConfig& config);

ImbalanceReport ComputeImbalanceReport(const LabeledDataset& dataset,
                                       const PartitionResult& partition);

// {"clients": [[...]], "shares": [[...]]}; non-finite report values are
// written as "inf" strings (NaN as null).
nlohmann::json PartitionToJson(const PartitionResult& partition);
nlohmann::json ReportToJson(const ImbalanceReport& report);
PartitionResult PartitionFromJson(const nlohmann::json& doc);

}  // namespace fediic

#endif  // FEDIIC_PARTITION_H_
