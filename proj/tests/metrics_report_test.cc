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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fediic/errors.h"
#include "fediic/metrics.h"
#include "fediic/report.h"
#include "test_util.h"

namespace fediic {
namespace {

using testing::TempDir;

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Confusion matrix with the given per-class correct counts out of `n`.
ConfusionMatrix WithRecalls(const std::vector<int>& correct, int n) {
  const int L = static_cast<int>(correct.size());
  ConfusionMatrix cm(L);
  for (int c = 0; c < L; ++c) {
    cm.Add(c, c, correct[c]);
    cm.Add(c, (c + 1) % L, n - correct[c]);
  }
  return cm;
}

TEST(BaccTest, Examples) {
  EXPECT_EQ(Bacc(WithRecalls({5, 5, 5}, 5)), 1.0);
  const std::vector<int> truth = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 0, 0, 0};
  EXPECT_EQ(Bacc(ConfusionMatrix::FromPredictions(truth, pred, 2)), 0.5);
  EXPECT_NEAR(Bacc(WithRecalls({9, 6, 3}, 10)), 0.6, 1e-15);
}

TEST(BaccTest, EmptyRowRejected) {
  ConfusionMatrix cm(2);
  cm.Add(0, 0);
  EXPECT_THROW(Bacc(cm), ContractError);
  EXPECT_THROW(cm.Add(2, 0), ContractError);
}

TEST(BaccTest, InvariantToRelabelingAndRowScaling) {
  const ConfusionMatrix cm = WithRecalls({7, 2, 4}, 9);
  ConfusionMatrix permuted(3);
  const int perm[3] = {2, 0, 1};
  ConfusionMatrix scaled(3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      permuted.Add(perm[a], perm[b], cm(a, b));
      scaled.Add(a, b, cm(a, b) * (a + 2));
    }
  }
  EXPECT_NEAR(Bacc(permuted), Bacc(cm), 1e-15);
  EXPECT_NEAR(Bacc(scaled), Bacc(cm), 1e-15);
}

TEST(GroupBaccTest, GroupsRecombineToOverall) {
  const ConfusionMatrix cm = WithRecalls({10, 8, 3, 1}, 10);
  const GroupBacc g = ComputeGroupBacc(cm, std::vector<int>{3});
  EXPECT_NEAR(g.minority, 0.1, 1e-15);
  EXPECT_NEAR(g.majority, (1.0 + 0.8 + 0.3) / 3, 1e-15);
  EXPECT_NEAR(g.overall, (1.0 + 0.8 + 0.3 + 0.1) / 4, 1e-15);
  EXPECT_EQ(g.overall, Bacc(cm));
  const GroupBacc same = ComputeGroupBacc(WithRecalls({4, 4, 4}, 8), std::vector<int>{0, 2});
  EXPECT_EQ(same.minority, 0.5);
  EXPECT_EQ(same.majority, 0.5);
  EXPECT_THROW(ComputeGroupBacc(cm, std::vector<int>{}), ContractError);
  EXPECT_THROW(ComputeGroupBacc(cm, std::vector<int>{0, 1, 2, 3}), ContractError);
}

TEST(ArgmaxTest, LowestIndexWinsTies) {
  EXPECT_EQ(ArgmaxRows(Tensor::Matrix(2, 3, {1, 3, 3, 0, 0, 0})), (std::vector<int>{1, 0}));
}

TEST(EfficiencyTest, RoundsToMatch) {
  const std::vector<double> s = {0.5, 0.7, 0.9};
  EXPECT_EQ(RoundsToMatchBaseline(s, 0.7), 2);
  EXPECT_EQ(RoundsToMatchBaseline(s, 0.95), std::nullopt);
  EXPECT_THROW(RoundsToMatchBaseline(std::vector<double>{}, 0.5), ContractError);
}

TEST(EfficiencyTest, ReferenceSpeedupPairs) {
  struct Pair {
    int baseline, method;
    double speedup;
  };
  const Pair pairs[] = {{175, 20, 8.75}, {175, 42, 4.17},  {175, 196, 0.89}, {175, 33, 5.30},
                        {195, 78, 2.50}, {195, 110, 1.77}, {195, 194, 1.01}, {195, 107, 1.82}};
  for (const Pair& p : pairs) {
    const auto s = Speedup(p.baseline, p.method);
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(*s, p.speedup, 0.005) << p.baseline << "/" << p.method;
  }
  EXPECT_EQ(*Speedup(175, 20), 8.75);
  EXPECT_EQ(Speedup(175, std::nullopt), std::nullopt);
}

RunSummary MakeRun(const std::string& mode, std::uint64_t seed, std::vector<double> val) {
  RunSummary r;
  r.mode = mode;
  r.seed = seed;
  r.val_series = val;
  r.test_series = val;
  r.final_bacc = *std::max_element(val.begin(), val.end());
  r.best_val_round = static_cast<int>(std::max_element(val.begin(), val.end()) - val.begin()) + 1;
  r.minority_bacc = r.final_bacc / 2;
  r.majority_bacc = r.final_bacc;
  return r;
}

TEST(ReportTest, SummaryRowsAndEfficiency) {
  std::vector<RunSummary> runs;
  for (std::uint64_t seed : {2, 0, 1}) {
    runs.push_back(MakeRun("fediic", seed, {0.4, 0.6, 0.8}));
    runs.push_back(MakeRun("fedavg", seed, {0.3, 0.5, 0.6}));
  }
  runs[1].val_series = {0.3, 0.9, 0.9};  // fedavg, seed 2
  const Report rep = BuildReport(runs);
  const auto lines = Lines(rep.summary_csv);
  ASSERT_EQ(lines.size(), 1u + 6 + 4);
  EXPECT_EQ(lines[0],
            "mode,seed,final_bacc,best_val_round,minority_bacc,majority_bacc,"
            "efficiency_rounds,speedup");
  EXPECT_EQ(lines[1].substr(0, 9), "fedavg,0,");
  EXPECT_EQ(lines[4].substr(0, 12), "fedavg,mean,");
  EXPECT_EQ(lines[6].substr(0, 9), "fediic,0,");
  // fediic reaches 0.6 at round 2; fedavg took 3 rounds.
  EXPECT_EQ(lines[6], "fediic,0,0.800000,3,0.400000,0.800000,2,1.500000");
  // Seed 2 baseline peaks at 0.9 in round 2, which fediic never reaches.
  EXPECT_EQ(lines[8], "fediic,2,0.800000,3,0.400000,0.800000,/,/");
  EXPECT_EQ(lines[9], "fediic,mean,0.800000,3.000000,0.400000,0.800000,2.000000,1.500000");
  EXPECT_EQ(lines[10], "fediic,std,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000");
  EXPECT_EQ(Lines(rep.series_csv).size(), 1u + 6 * 3);
}

TEST(ReportTest, SingleRunWithoutBaseline) {
  const Report rep = BuildReport({MakeRun("fediic", 4, {0.5})});
  const auto lines = Lines(rep.summary_csv);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1], "fediic,4,0.500000,1,0.250000,0.500000,,");
  EXPECT_THROW(BuildReport({}), DataError);
}

ExperimentResult FakeResult(double offset) {
  ExperimentResult r;
  for (int k = 1; k <= 3; ++k) {
    RoundRecord rec;
    rec.round = k;
    rec.bacc_val = offset + 0.1 * k;
    rec.bacc_test = offset + 0.05 * k;
    r.records.push_back(rec);
  }
  r.best_val_round = 3;
  r.best_val_bacc = offset + 0.3;
  r.final_test_bacc = offset + 0.15;
  r.best_params = ModelParams::Init(ModelSpec{}, 1);
  return r;
}

TEST(ReportTest, RunDirectoriesRoundTripAndByteIdenticalReport) {
  TempDir dir("report");
  std::vector<std::string> dirs;
  for (Mode m : {Mode::kFedIIC, Mode::kFedAvg}) {
    for (std::uint64_t seed : {0, 1, 2}) {
      dirs.push_back(dir.file(RunDirectoryName(m, seed)));
      WriteRun(dirs.back(), m, seed, FakeResult(m == Mode::kFedAvg ? 0.0 : 0.1));
    }
  }
  EXPECT_EQ(RunDirectoryName(Mode::kFedAvgDala, 3), "fedavg+dala_seed3");
  const RunSummary one = LoadRun(dirs[0]);
  EXPECT_EQ(one.mode, "fediic");
  EXPECT_EQ(one.best_val_round, 3);
  EXPECT_NEAR(one.final_bacc, 0.25, 1e-12);
  EXPECT_EQ(one.val_series.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dirs[0]) / "model.ckpt"));

  auto build = [&] {
    std::vector<RunSummary> runs;
    for (const auto& d : dirs) runs.push_back(LoadRun(d));
    return BuildReport(runs);
  };
  WriteReport(build(), dir.file("a"));
  WriteReport(build(), dir.file("b"));
  for (const char* name : {"summary.csv", "series.csv"}) {
    std::ifstream a(dir.file(std::string("a/") + name)), b(dir.file(std::string("b/") + name));
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << name;
    EXPECT_FALSE(sa.str().empty());
  }
  EXPECT_EQ(Lines(build().summary_csv).size(), 1u + 6 + 4);
  EXPECT_THROW(LoadRun(dir.file("missing")), DataError);
}

}  // namespace
}  // namespace fediic
