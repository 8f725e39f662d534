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

#include "fediic/partition.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "fediic/errors.h"
#include "fediic/random.h"

namespace fediic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void PartitionConfig::Validate(int num_classes) const {
  if (num_clients < 2) throw ConfigError("partition: need at least 2 clients");
  if (!(alpha_minor > 0.0) || !(alpha_major > 0.0)) {
    throw ConfigError("partition: Dirichlet alphas must be > 0");
  }
  for (int c : minor_classes) {
    if (c < 0 || c >= num_classes) {
      throw ConfigError("partition: minor class " + std::to_string(c) +
                        " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

std::vector<std::size_t> PartitionResult::ClientSizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(clients.size());
  for (const auto& c : clients) sizes.push_back(c.size());
  return sizes;
}

std::vector<double> PriorFromCounts(std::span<const std::int64_t> counts) {
  const std::int64_t total =
      std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (total <= 0) throw ContractError("class prior of an empty subset");
  std::vector<double> p;
  p.reserve(counts.size());
  for (std::int64_t c : counts)
    p.push_back(static_cast<double>(c) / static_cast<double>(total));
  return p;
}

std::vector<double> ClassPrior(std::span<const int> labels, int num_classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw ContractError("label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return PriorFromCounts(counts);
}

std::vector<double> ClassPrior(const LabeledDataset& dataset,
                               std::span<const std::size_t> subset) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(dataset.num_classes), 0);
  for (std::size_t i : subset) ++counts[static_cast<std::size_t>(dataset.labels[i])];
  return PriorFromCounts(counts);
}

double ImbalanceDegree(std::span<const double> prior) {
  if (prior.empty()) throw ContractError("imbalance degree of an empty prior");
  const auto [mn, mx] = std::minmax_element(prior.begin(), prior.end());
  if (*mn <= 0.0) return kInf;
  return *mx / *mn;
}

double ConcentrationDegree(std::span<const double> shares) {
  double h = 0.0;
  for (double p : shares)
    if (p > 0.0) h -= p * std::log(p);
  if (h <= 0.0) return kInf;
  return 1.0 / h;
}

bool IsConcentrated(std::span<const double> shares) {
  for (std::size_t i = 1; i < shares.size(); ++i)
    if (shares[i] < shares[i - 1]) return false;
  return true;
}

std::vector<std::size_t> ClientsByAscendingSize(const PartitionResult& result) {
  std::vector<std::size_t> order(result.clients.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.clients[a].size() > result.clients[b].size();
  });
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<std::int64_t> LargestRemainder(std::int64_t total,
                                           std::span<const double> proportions) {
  const std::size_t k = proportions.size();
  std::vector<std::int64_t> out(k, 0);
  std::vector<double> frac(k, 0.0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = proportions[i] * static_cast<double>(total);
    const double fl = std::floor(exact);
    out[i] = static_cast<std::int64_t>(fl);
    frac[i] = exact - fl;
    assigned += out[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  // Proportions that do not sum to exactly 1 can leave the floors off by
  // more than k in either direction.
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[order[r % k]];
  while (assigned > total) {
    --*std::max_element(out.begin(), out.end());
    --assigned;
  }
  return out;
}

std::vector<double> SampleDirichlet(int k, double alpha, std::uint64_t seed) {
  if (k <= 0 || !(alpha > 0.0)) throw ContractError("dirichlet: bad parameters");
  Rng rng(seed);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (double& v : p) {
    v = gamma(rng);
    sum += v;
  }
  if (!(sum > 0.0)) {
    // All draws underflowed (tiny alpha): degenerate to a single client.
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::fill(p.begin(), p.end(), 0.0);
    p[static_cast<std::size_t>(pick(rng))] = 1.0;
    return p;
  }
  for (double& v : p) v /= sum;
  return p;
}

namespace {

using AlphaForClass = std::function<double(int)>;

PartitionResult PartitionByClass(const LabeledDataset& dataset, int num_clients,
                                 const AlphaForClass& alpha_for, bool sort_desc,
                                 std::uint64_t seed) {
  if (num_clients < 2) throw ConfigError("partition: need at least 2 clients");
  const int L = dataset.num_classes;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

  PartitionResult result;
  result.clients.assign(static_cast<std::size_t>(num_clients), {});
  result.shares.assign(static_cast<std::size_t>(L),
                       std::vector<double>(static_cast<std::size_t>(num_clients), 0.0));
  for (int c = 0; c < L; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    // Proportions are drawn even for empty classes so that the random stream
    // of later classes does not depend on which classes are populated.
    std::vector<double> p = SampleDirichlet(
        num_clients, alpha_for(c), DeriveSeed(seed, {0xD1u, static_cast<std::uint64_t>(c)}));
    if (sort_desc) std::sort(p.begin(), p.end(), std::greater<>());
    if (pool.empty()) {
      result.empty_classes.push_back(c);
      continue;
    }
    Rng rng(DeriveSeed(seed, {0x5Au, static_cast<std::uint64_t>(c)}));
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto counts = LargestRemainder(static_cast<std::int64_t>(pool.size()), p);
    std::size_t cursor = 0;
    for (int k = 0; k < num_clients; ++k) {
      const auto n = static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]);
      auto& dst = result.clients[static_cast<std::size_t>(k)];
      dst.insert(dst.end(), pool.begin() + static_cast<std::ptrdiff_t>(cursor),
                 pool.begin() + static_cast<std::ptrdiff_t>(cursor + n));
      cursor += n;
      result.shares[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
          static_cast<double>(n) / static_cast<double>(pool.size());
    }
  }
  for (auto& idx : result.clients) std::sort(idx.begin(), idx.end());
  return result;
}

}  // namespace

PartitionResult DirichletPartition(const LabeledDataset& dataset,
                                   int num_clients, double alpha,
                                   std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ConfigError("partition: alpha must be > 0");
  return PartitionByClass(
      dataset, num_clients, [alpha](int) { return alpha; }, false, seed);
}

L2PartitionOutput L2Partition(const LabeledDataset& dataset,
                              const PartitionConfig& config) {
  config.Validate(dataset.num_classes);
  std::vector<bool> minor(static_cast<std::size_t>(dataset.num_classes), false);
  for (int c : config.minor_classes) minor[static_cast<std::size_t>(c)] = true;
  L2PartitionOutput out;
  out.partition = PartitionByClass(
      dataset, config.num_clients,
      [&](int c) {
        return minor[static_cast<std::size_t>(c)] ? config.alpha_minor
                                                  : config.alpha_major;
      },
      config.agglomerate, config.seed);
  out.report = ComputeImbalanceReport(dataset, out.partition);
  return out;
}

ImbalanceReport ComputeImbalanceReport(const LabeledDataset& dataset,
                                       const PartitionResult& partition) {
  ImbalanceReport report;
  report.global_gamma = ImbalanceDegree(PriorFromCounts(dataset.ClassCounts()));
  for (const auto& idx : partition.clients) {
    if (idx.empty()) {
      report.per_client_gamma.push_back(kInf);
      continue;
    }
    report.per_client_gamma.push_back(ImbalanceDegree(ClassPrior(dataset, idx)));
  }
  const auto order = ClientsByAscendingSize(partition);
  std::vector<bool> empty(partition.shares.size(), false);
  for (int c : partition.empty_classes) empty[static_cast<std::size_t>(c)] = true;
  for (std::size_t c = 0; c < partition.shares.size(); ++c) {
    const auto& row = partition.shares[c];
    if (empty[c]) {
      report.per_class_conc.push_back(std::numeric_limits<double>::quiet_NaN());
      report.per_class_concentrated.push_back(false);
      continue;
    }
    report.per_class_conc.push_back(ConcentrationDegree(row));
    std::vector<double> ordered;
    ordered.reserve(order.size());
    for (std::size_t k : order) ordered.push_back(row[k]);
    report.per_class_concentrated.push_back(IsConcentrated(ordered));
  }
  return report;
}

namespace {

nlohmann::json NumberOrSentinel(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json PartitionToJson(const PartitionResult& partition) {
  nlohmann::json doc;
  doc["clients"] = partition.clients;
  doc["shares"] = partition.shares;
  doc["empty_classes"] = partition.empty_classes;
  return doc;
}

nlohmann::json ReportToJson(const ImbalanceReport& report) {
  nlohmann::json doc;
  doc["global_gamma"] = NumberOrSentinel(report.global_gamma);
  auto& pc = doc["per_client_gamma"] = nlohmann::json::array();
  for (double g : report.per_client_gamma) pc.push_back(NumberOrSentinel(g));
  auto& conc = doc["per_class_conc"] = nlohmann::json::array();
  for (double c : report.per_class_conc) conc.push_back(NumberOrSentinel(c));
  doc["per_class_concentrated"] = report.per_class_concentrated;
  return doc;
}

PartitionResult PartitionFromJson(const nlohmann::json& doc) {
  PartitionResult p;
  try {
    p.clients = doc.at("clients").get<std::vector<std::vector<std::size_t>>>();
    p.shares = doc.at("shares").get<std::vector<std::vector<double>>>();
    if (doc.contains("empty_classes"))
      p.empty_classes = doc.at("empty_classes").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed partition document: ") + e.what());
  }
  return p;
}

}  // namespace fediic
