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

// Experiment configuration files. INI syntax with the sections [data],
// [partition], [model], [loss], [federation] and [secureagg]; unknown keys
// are rejected.

#ifndef FEDIIC_CONFIG_H_
#define FEDIIC_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fediic/dataset.h"
#include "fediic/federation.h"
#include "fediic/model.h"
#include "fediic/partition.h"

namespace fediic {

struct DataConfig {
  // Synthetic long-tailed blobs unless train_csv is set.
  int num_classes = 8;
  std::size_t dim = 16;
  std::int64_t num_max = 1000;
  double gamma = 50.0;
  int major_count = 5;
  double spread = 1.0;
  std::size_t val_per_class = 50;
  std::size_t test_per_class = 100;
  std::uint64_t seed = 0;

  std::string train_csv;
  std::string val_csv;
  std::string test_csv;
  // Minority classes for group metrics; synthetic data defaults to the
  // classes after the first major_count.
  std::vector<int> minority_classes;

  bool synthetic() const { return train_csv.empty(); }
};

struct ExperimentConfig {
  DataConfig data;
  PartitionConfig partition;
  ModelSpec model;
  FederationConfig federation;
  std::vector<Mode> modes{Mode::kFedIIC};
  std::vector<std::uint64_t> seeds{0};
};

// Throws ConfigError with the offending section.key on any problem.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

struct PreparedData {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
  std::vector<int> minority_classes;
};

PreparedData PrepareData(const DataConfig& config);

// Splits `data.train` for one run and bundles the evaluation sets.
FederationData BuildFederationData(const PreparedData& data,
                                   const PartitionConfig& partition,
                                   L2PartitionOutput* split = nullptr);

}  // namespace fediic

#endif  // FEDIIC_CONFIG_H_
