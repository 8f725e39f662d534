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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <utility>

#include "fediic/dataset.h"
#include "fediic/errors.h"
#include "fediic/random.h"

namespace fediic {

void LabeledDataset::Validate() const {
  if (features.size() != labels.size() * dim) {
    throw DataError("dataset has " + std::to_string(labels.size()) +
                    " labels but " + std::to_string(features.size()) +
                    " feature values at dim " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw DataError("sample " + std::to_string(i) + " has label " +
                      std::to_string(labels[i]) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
}

std::vector<std::int64_t> LabeledDataset::ClassCounts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

LabeledDataset LabeledDataset::Subset(
    std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.labels.reserve(indices.size());
  out.features.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    if (i >= size()) throw ContractError("subset index out of range");
    out.labels.push_back(labels[i]);
    auto s = sample(i);
    out.features.insert(out.features.end(), s.begin(), s.end());
  }
  return out;
}

Tensor LabeledDataset::Batch(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ContractError("batch must be non-empty");
  std::vector<double> v;
  v.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    auto s = sample(i);
    v.insert(v.end(), s.begin(), s.end());
  }
  return Tensor::Matrix(indices.size(), dim, std::move(v));
}

Tensor LabeledDataset::AllFeatures() const {
  if (empty()) throw ContractError("dataset is empty");
  return Tensor::Matrix(size(), dim, features);
}

std::vector<int> LabeledDataset::BatchLabels(
    std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

Tensor BlobMeans(int num_classes, std::size_t dim, std::uint64_t seed) {
  if (num_classes <= 0) throw ConfigError("make_blobs: class count must be > 0");
  if (dim < 2) throw ConfigError("make_blobs: feature dimension must be >= 2");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor means({static_cast<std::size_t>(num_classes), dim});
  for (double& m : means.values()) m = normal(rng);
  return means;
}

LabeledDataset SampleBlobs(const Tensor& means, std::size_t per_class_count,
                           double cluster_spread, std::uint64_t seed) {
  if (per_class_count == 0) throw ConfigError("make_blobs: per-class count must be > 0");
  if (!(cluster_spread > 0.0)) {
    throw ConfigError("make_blobs: cluster spread must be > 0");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledDataset ds;
  ds.dim = means.cols();
  ds.num_classes = static_cast<int>(means.rows());
  ds.labels.reserve(per_class_count * means.rows());
  ds.features.reserve(per_class_count * means.size());
  for (int c = 0; c < ds.num_classes; ++c) {
    auto mean = means.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < per_class_count; ++i) {
      ds.labels.push_back(c);
      for (double m : mean) ds.features.push_back(m + cluster_spread * normal(rng));
    }
  }
  return ds;
}

LabeledDataset MakeBlobs(int num_classes, std::size_t dim,
                         std::size_t per_class_count, double cluster_spread,
                         std::uint64_t seed) {
  return SampleBlobs(BlobMeans(num_classes, dim, seed), per_class_count,
                     cluster_spread, DeriveSeed(seed, {1}));
}

void LongTailSpec::Validate() const {
  if (num_classes < 2) throw ConfigError("long-tail spec: need >= 2 classes");
  if (major_count < 1 || major_count >= num_classes) {
    throw ConfigError("long-tail spec: major_count must be in [1, L)");
  }
  if (!(gamma >= 1.0)) throw ConfigError("long-tail spec: gamma must be >= 1");
  if (num_max < 1) throw ConfigError("long-tail spec: num_max must be >= 1");
}

std::vector<std::int64_t> LongTailCounts(const LongTailSpec& spec) {
  spec.Validate();
  const double L = spec.num_classes;
  const double denom = 10.0 * L - 1.0;
  std::vector<std::int64_t> counts;
  counts.reserve(static_cast<std::size_t>(spec.num_classes));
  for (int c = 1; c <= spec.num_classes; ++c) {
    const bool major = c <= spec.major_count;
    const double numer = major ? (c - 1.0) : (c - 1.0 + 9.0 * L);
    const double amount =
        static_cast<double>(spec.num_max) * std::pow(spec.gamma, -numer / denom);
    // The guard keeps exact products such as 5000 * 10^-1 from flooring to
    // 499 through representation error.
    counts.push_back(static_cast<std::int64_t>(std::floor(amount + 1e-9)));
  }
  return counts;
}

LabeledDataset SubsampleLongTail(const LabeledDataset& dataset,
                                 const LongTailSpec& spec, std::uint64_t seed) {
  const std::vector<std::int64_t> target = LongTailCounts(spec);
  if (dataset.num_classes != spec.num_classes) {
    throw DataError("subsample: dataset has " +
                    std::to_string(dataset.num_classes) +
                    " classes, spec expects " + std::to_string(spec.num_classes));
  }
  std::vector<std::vector<std::size_t>> by_class(target.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < target.size(); ++c) {
    auto& pool = by_class[c];
    if (static_cast<std::int64_t>(pool.size()) < target[c]) {
      throw DataError("subsample: class " + std::to_string(c) + " has " +
                      std::to_string(pool.size()) + " samples, needs " +
                      std::to_string(target[c]));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    keep.insert(keep.end(), pool.begin(), pool.begin() + target[c]);
  }
  std::sort(keep.begin(), keep.end());
  return dataset.Subset(keep);
}

namespace {

std::vector<std::string_view> SplitComma(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

LabeledDataset LoadCsv(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++lineno;
  auto header = SplitComma(Trim(line));
  if (header.size() < 2 || Trim(header[0]) != "label") {
    throw ParseError(lineno, "header must be label,f0,...,f{d-1}");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (Trim(header[j]) != "f" + std::to_string(j - 1)) {
      throw ParseError(lineno, "unexpected header column '" +
                                   std::string(header[j]) + "'");
    }
  }
  LabeledDataset ds;
  ds.dim = header.size() - 1;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = Trim(line);
    if (row.empty()) continue;
    auto cols = SplitComma(row);
    if (cols.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) +
                                   " columns, found " +
                                   std::to_string(cols.size()));
    }
    auto label_sv = Trim(cols[0]);
    int label = 0;
    auto [lp, lec] =
        std::from_chars(label_sv.data(), label_sv.data() + label_sv.size(), label);
    if (lec != std::errc() || lp != label_sv.data() + label_sv.size() || label < 0) {
      throw ParseError(lineno, "label '" + std::string(label_sv) +
                                   "' is not a non-negative integer");
    }
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
    for (std::size_t j = 1; j < cols.size(); ++j) {
      auto sv = Trim(cols[j]);
      double v = 0.0;
      auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (ec != std::errc() || p != sv.data() + sv.size() || !std::isfinite(v)) {
        throw ParseError(lineno, "feature f" + std::to_string(j - 1) + " value '" +
                                     std::string(sv) + "' is not a finite number");
      }
      ds.features.push_back(v);
    }
  }
  ds.num_classes = std::max(num_classes, max_label + 1);
  ds.Validate();
  return ds;
}

void WriteCsv(const LabeledDataset& dataset, const std::string& path) {
  dataset.Validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file '" + path + "'");
  out << "label";
  for (std::size_t j = 0; j < dataset.dim; ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.labels[i];
    for (double v : dataset.sample(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
}

TwoViewBatch AugmentTwoViews(const Tensor& features, std::span<const int> labels,
                             const AugmentOptions& options, std::uint64_t seed) {
  if (!(options.noise_sigma >= 0.0)) {
    throw ContractError("augment: noise_sigma must be >= 0");
  }
  if (!(options.dropout_p >= 0.0 && options.dropout_p < 1.0)) {
    throw ContractError("augment: dropout_p must be in [0, 1)");
  }
  if (features.rows() != labels.size()) {
    throw StructuralError("augment: " + std::to_string(features.rows()) +
                          " rows but " + std::to_string(labels.size()) + " labels");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution drop(options.dropout_p);
  auto make_view = [&]() {
    Tensor v = features;
    for (double& x : v.values()) {
      if (options.noise_sigma > 0.0) x += options.noise_sigma * normal(rng);
      if (options.dropout_p > 0.0 && drop(rng)) x = 0.0;
    }
    return v;
  };
  TwoViewBatch batch;
  batch.view1 = make_view();
  batch.view2 = make_view();
  batch.labels.assign(labels.begin(), labels.end());
  return batch;
}

}  // namespace fediic
