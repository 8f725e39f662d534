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

#include "fediic/config.h"
#include "fediic/errors.h"
#include "test_util.h"

namespace fediic {
namespace {

constexpr const char* kSmall = R"(
[data]
classes = 4
dim = 3
num_max = 40
gamma = 4
major_count = 2
val_per_class = 5
test_per_class = 6
seed = 9

[partition]
clients = 3
alpha_minor = 10
alpha_major = 0.5

[model]
hidden = 8
feat_dim = 6

[loss]
q = 0.5
k1 = 0.3

[federation]
modes = fedavg, fediic
seeds = 1, 2
rounds = 2
optimizer = sgd
lr = 0.05
)";

TEST(ConfigTest, ParsesValuesAndDefaults) {
  const ExperimentConfig c = ParseConfig(kSmall);
  EXPECT_EQ(c.data.num_classes, 4);
  EXPECT_EQ(c.data.minority_classes, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.partition.minor_classes, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.partition.num_clients, 3);
  EXPECT_TRUE(c.partition.agglomerate);
  EXPECT_EQ(c.model.input_dim, 3u);
  EXPECT_EQ(c.model.num_classes, 4);
  EXPECT_EQ(c.model.hidden, 8u);
  EXPECT_EQ(c.model.proj_dim, 16u);
  EXPECT_EQ(c.federation.loss.q, 0.5);
  EXPECT_EQ(c.federation.loss.k1, 0.3);
  EXPECT_EQ(c.federation.loss.tau, 0.1);
  EXPECT_EQ(c.modes, (std::vector<Mode>{Mode::kFedAvg, Mode::kFedIIC}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(c.federation.optimizer.kind, OptimizerKind::kSgdMomentum);
  EXPECT_EQ(c.federation.optimizer.learning_rate, 0.05);
  EXPECT_FALSE(c.federation.secure);
}

TEST(ConfigTest, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(ParseConfig("[data]\nclases = 4\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[extra]\na = 1\n"), ConfigError);
}

TEST(ConfigTest, RejectsBadValues) {
  EXPECT_THROW(ParseConfig("[federation]\nrounds = many\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[federation]\nclient_fraction = 1.5\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[federation]\nmodes = fedprox\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[federation]\nseeds = 1, x\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[loss]\ntau = -1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[partition]\nagglomerate = maybe\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[data]\ngamma = 0.5\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[data]\ntrain_csv = a.csv\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[data\n"), ConfigError);
  EXPECT_THROW(LoadConfig("/nonexistent/fediic.ini"), ConfigError);
}

TEST(ConfigTest, PreparedSyntheticDataFollowsLongTail) {
  const ExperimentConfig c = ParseConfig(kSmall);
  const PreparedData d = PrepareData(c.data);
  const LongTailSpec spec{4, 40, 4.0, 2};
  EXPECT_EQ(d.train.ClassCounts(), LongTailCounts(spec));
  EXPECT_EQ(d.validation.ClassCounts(), (std::vector<std::int64_t>(4, 5)));
  EXPECT_EQ(d.test.ClassCounts(), (std::vector<std::int64_t>(4, 6)));
  EXPECT_EQ(PrepareData(c.data).train.features, d.train.features);

  L2PartitionOutput split;
  const FederationData fd = BuildFederationData(d, c.partition, &split);
  ASSERT_EQ(fd.clients.size(), 3u);
  std::size_t total = 0;
  for (const auto& client : fd.clients) total += client.size();
  EXPECT_EQ(total, d.train.size());
  EXPECT_EQ(fd.minority_classes, (std::vector<int>{2, 3}));
}

TEST(ConfigTest, CsvDataUsesFileClassCount) {
  testing::TempDir dir("config");
  const ExperimentConfig synth = ParseConfig(kSmall);
  const PreparedData d = PrepareData(synth.data);
  WriteCsv(d.train, dir.file("train.csv"));
  WriteCsv(d.validation, dir.file("val.csv"));
  WriteCsv(d.test, dir.file("test.csv"));
  const ExperimentConfig c = ParseConfig("[data]\ntrain_csv = " + dir.file("train.csv") +
                                         "\nval_csv = " + dir.file("val.csv") +
                                         "\ntest_csv = " + dir.file("test.csv") + "\n");
  const PreparedData loaded = PrepareData(c.data);
  EXPECT_EQ(loaded.train.features, d.train.features);
  EXPECT_EQ(loaded.test.num_classes, 4);
}

}  // namespace
}  // namespace fediic
