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

#ifndef FEDIIC_DATASET_H_
#define FEDIIC_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fediic/tensor.h"

namespace fediic {

// Labeled feature vectors. Features are stored flat (row-major, `dim` per
// sample) so that empty client shards are representable.
struct LabeledDataset {
  std::size_t dim = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }

  // Throws DataError when labels leave [0, num_classes) or sizes disagree.
  void Validate() const;

  std::vector<std::int64_t> ClassCounts() const;
  LabeledDataset Subset(std::span<const std::size_t> indices) const;
  // Rows `indices` stacked into an (n x dim) tensor. n must be positive.
  Tensor Batch(std::span<const std::size_t> indices) const;
  Tensor AllFeatures() const;
  std::vector<int> BatchLabels(std::span<const std::size_t> indices) const;
};

// Gaussian blobs: class c is drawn around its own mean (standard normal
// coordinates) with isotropic noise of standard deviation `cluster_spread`.
// Samples are ordered class by class.
LabeledDataset MakeBlobs(int num_classes, std::size_t dim,
                         std::size_t per_class_count, double cluster_spread,
                         std::uint64_t seed);

// The two halves of MakeBlobs, for drawing several splits around the same
// class means. BlobMeans returns a (num_classes x dim) matrix.
Tensor BlobMeans(int num_classes, std::size_t dim, std::uint64_t seed);
LabeledDataset SampleBlobs(const Tensor& means, std::size_t per_class_count,
                           double cluster_spread, std::uint64_t seed);

// Long-tailed class sizes with a gap between majority and minority classes.
// Classes [0, major_count) are major, the rest minor.
struct LongTailSpec {
  int num_classes = 10;
  std::int64_t num_max = 5000;
  double gamma = 10.0;
  int major_count = 7;

  void Validate() const;
};

// num(c) = floor(num_max * gamma^-(c-1)/(10L-1))       for major c (1-based)
// num(c) = floor(num_max * gamma^-(c-1+9L)/(10L-1))    for minor c
std::vector<std::int64_t> LongTailCounts(const LongTailSpec& spec);

// Keeps exactly LongTailCounts(spec)[c] samples of every class, sampled
// without replacement. Relative order of the kept samples is preserved.
LabeledDataset SubsampleLongTail(const LabeledDataset& dataset,
                                 const LongTailSpec& spec, std::uint64_t seed);

// CSV with header `label,f0,...,f{d-1}`. The class count is inferred as
// max(label) + 1 unless `num_classes` is larger.
LabeledDataset LoadCsv(const std::string& path, int num_classes = 0);
void WriteCsv(const LabeledDataset& dataset, const std::string& path);

struct TwoViewBatch {
  Tensor view1;
  Tensor view2;
  std::vector<int> labels;
};

struct AugmentOptions {
  double noise_sigma = 0.1;
  double dropout_p = 0.1;
};

// Each view is x + N(0, sigma^2) noise followed by independent per-feature
// zeroing with probability dropout_p.
TwoViewBatch AugmentTwoViews(const Tensor& features, std::span<const int> labels,
                             const AugmentOptions& options, std::uint64_t seed);

}  // namespace fediic

#endif  // FEDIIC_DATASET_H_
