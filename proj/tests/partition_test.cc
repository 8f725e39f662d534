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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fediic/dataset.h"
#include "fediic/errors.h"
#include "fediic/partition.h"

namespace fediic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LabeledDataset LabelsOnly(const std::vector<std::int64_t>& counts) {
  LabeledDataset d;
  d.dim = 1;
  d.num_classes = static_cast<int>(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::int64_t i = 0; i < counts[c]; ++i) {
      d.labels.push_back(static_cast<int>(c));
      d.features.push_back(static_cast<double>(d.labels.size()));
    }
  }
  return d;
}

void ExpectDisjointCover(const PartitionResult& p, std::size_t n) {
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& idx : p.clients) {
    total += idx.size();
    seen.insert(idx.begin(), idx.end());
  }
  EXPECT_EQ(total, n);
  EXPECT_EQ(seen.size(), n);
  if (!seen.empty()) EXPECT_EQ(*seen.rbegin(), n - 1);
}

TEST(PriorTest, TwoClassCounts) {
  const std::vector<std::int64_t> counts = {40, 160};
  EXPECT_EQ(PriorFromCounts(counts), (std::vector<double>{0.2, 0.8}));
  const std::vector<int> labels = {2, 2, 2};
  EXPECT_EQ(ClassPrior(labels, 3), (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_THROW(ClassPrior(std::vector<int>{}, 3), ContractError);
}

TEST(ImbalanceTest, Examples) {
  EXPECT_EQ(ImbalanceDegree(std::vector<double>(4, 0.25)), 1.0);
  const std::vector<std::int64_t> vidir = {680, 1832, 211, 32, 475, 51, 82};
  EXPECT_NEAR(ImbalanceDegree(PriorFromCounts(vidir)), 57.25, 1e-12);
  const std::vector<std::int64_t> sparse = {40, 160, 0, 0, 0, 0, 0};
  EXPECT_EQ(ImbalanceDegree(PriorFromCounts(sparse)), kInf);
}

TEST(ConcentrationTest, Examples) {
  EXPECT_NEAR(ConcentrationDegree(std::vector<double>(4, 0.25)), 1.0 / std::log(4.0), 1e-12);
  EXPECT_NEAR(ConcentrationDegree(std::vector<double>{0.5, 0.5, 0, 0}), 1.0 / std::log(2.0),
              1e-12);
  EXPECT_EQ(ConcentrationDegree(std::vector<double>{0, 1, 0}), kInf);
  EXPECT_TRUE(IsConcentrated(std::vector<double>{0.1, 0.2, 0.3, 0.4}));
  EXPECT_FALSE(IsConcentrated(std::vector<double>{0.4, 0.1, 0.3, 0.2}));
  EXPECT_TRUE(IsConcentrated(std::vector<double>(3, 1.0 / 3)));
}

TEST(LargestRemainderTest, ConservesAndBreaksTiesLow) {
  EXPECT_EQ(LargestRemainder(10, std::vector<double>{0.25, 0.25, 0.25, 0.25}),
            (std::vector<std::int64_t>{3, 3, 2, 2}));
  EXPECT_EQ(LargestRemainder(7, std::vector<double>{0.5, 0.3, 0.2}),
            (std::vector<std::int64_t>{4, 2, 1}));
  EXPECT_EQ(LargestRemainder(1, std::vector<double>{0.4, 0.6}),
            (std::vector<std::int64_t>{0, 1}));
}

TEST(DirichletPartitionTest, DisjointCoverAndDeterminism) {
  const LabeledDataset d = LabelsOnly({37, 11, 5, 1});
  const PartitionResult a = DirichletPartition(d, 6, 0.5, 3);
  ExpectDisjointCover(a, d.size());
  for (const auto& row : a.shares)
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  EXPECT_EQ(DirichletPartition(d, 6, 0.5, 3).clients, a.clients);
}

TEST(DirichletPartitionTest, SingleSampleGoesToOneClient) {
  const PartitionResult p = DirichletPartition(LabelsOnly({1}), 2, 1.0, 0);
  EXPECT_EQ(p.clients[0].size() + p.clients[1].size(), 1u);
}

TEST(DirichletPartitionTest, EmptyClassFlagged) {
  const PartitionResult p = DirichletPartition(LabelsOnly({4, 0, 4}), 3, 1.0, 0);
  EXPECT_EQ(p.empty_classes, std::vector<int>{1});
  for (double s : p.shares[1]) EXPECT_EQ(s, 0.0);
}

TEST(DirichletPartitionTest, LargeAlphaIsNearUniform) {
  const LabeledDataset d = LabelsOnly({1000, 1000});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PartitionResult p = DirichletPartition(d, 5, 1e6, seed);
    for (const auto& row : p.shares)
      for (double s : row) EXPECT_LT(std::abs(s - 0.2), 0.01);
  }
}

TEST(L2PartitionTest, AgglomerateSharesNonIncreasing) {
  const LabeledDataset d = LabelsOnly({500, 300, 200, 40, 10});
  PartitionConfig c;
  c.num_clients = 20;
  c.minor_classes = {3, 4};
  c.seed = 5;
  const L2PartitionOutput out = L2Partition(d, c);
  ExpectDisjointCover(out.partition, d.size());
  for (const auto& row : out.partition.shares)
    for (std::size_t k = 1; k < row.size(); ++k) EXPECT_LE(row[k], row[k - 1]);
  EXPECT_NEAR(out.report.global_gamma, 50.0, 1e-12);
  ASSERT_EQ(out.report.per_client_gamma.size(), 20u);
  for (double conc : out.report.per_class_conc) EXPECT_GE(conc, 1.0 / std::log(20.0) - 1e-12);
}

TEST(L2PartitionTest, SmallAlphaConcentratesMore) {
  const LabeledDataset d = LabelsOnly({400, 400, 400});
  double mean_small = 0.0;
  double mean_large = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double alpha : {0.1, 50.0}) {
      const PartitionResult p = DirichletPartition(d, 20, alpha, seed);
      double sum = 0.0;
      for (const auto& row : p.shares) sum += ConcentrationDegree(row);
      (alpha < 1 ? mean_small : mean_large) += sum / 3.0 / 20.0;
    }
  }
  EXPECT_GT(mean_small, mean_large);
}

TEST(L2PartitionTest, RejectsBadConfig) {
  const LabeledDataset d = LabelsOnly({5, 5});
  PartitionConfig c;
  c.num_clients = 1;
  EXPECT_THROW(L2Partition(d, c), ConfigError);
  c.num_clients = 2;
  c.alpha_minor = 0.0;
  EXPECT_THROW(L2Partition(d, c), ConfigError);
  c.alpha_minor = 1.0;
  c.minor_classes = {2};
  EXPECT_THROW(L2Partition(d, c), ConfigError);
}

TEST(PartitionJsonTest, RoundTripAndSentinels) {
  const LabeledDataset d = LabelsOnly({6, 0, 3});
  PartitionConfig c;
  c.num_clients = 3;
  const L2PartitionOutput out = L2Partition(d, c);
  const PartitionResult back = PartitionFromJson(PartitionToJson(out.partition));
  EXPECT_EQ(back.clients, out.partition.clients);
  EXPECT_EQ(back.shares, out.partition.shares);
  const auto report = ReportToJson(out.report);
  EXPECT_EQ(report["global_gamma"], "inf");
  EXPECT_TRUE(report["per_class_conc"][1].is_null());
  EXPECT_THROW(PartitionFromJson(nlohmann::json{{"clients", 3}}), DataError);
}

}  // namespace
}  // namespace fediic
