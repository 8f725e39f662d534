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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fediic/errors.h"
#include "fediic/losses.h"
#include "test_util.h"

namespace fediic {
namespace {

using testing::RandomLabels;
using testing::RandomMatrix;
using testing::UnitRows;

double Dot(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
  return s;
}

// Direct loop over anchors with a per-pair temperature.
double ContrastiveOracle(const Tensor& z, const std::vector<int>& y,
                         const std::function<double(int, int)>& temp) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double denom = 0.0;
    int positives = 0;
    for (std::size_t a = 0; a < z.rows(); ++a) {
      if (a == i) continue;
      denom += std::exp(Dot(z, i, z, a) / temp(y[i], y[a]));
      positives += y[a] == y[i];
    }
    if (positives == 0) continue;
    double acc = 0.0;
    for (std::size_t p = 0; p < z.rows(); ++p) {
      if (p == i || y[p] != y[i]) continue;
      acc += Dot(z, i, z, p) / temp(y[i], y[p]) - std::log(denom);
    }
    total += -acc / positives;
  }
  return total;
}

double InterOracle(const Tensor& z, const std::vector<int>& y, const Tensor& v, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto same = std::count(y.begin(), y.end(), y[i]);
    double denom = 0.0;
    for (std::size_t j = 0; j < v.rows(); ++j) denom += std::exp(Dot(z, i, v, j) / tau);
    total += -(Dot(z, i, v, static_cast<std::size_t>(y[i])) / tau - std::log(denom)) /
             static_cast<double>(same);
  }
  return total;
}

double CeOracle(const Tensor& logits, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double denom = 0.0;
    for (double v : logits.row(i)) denom += std::exp(v);
    total += std::log(denom) - logits(i, static_cast<std::size_t>(y[i]));
  }
  return total / static_cast<double>(logits.rows());
}

double Scl(const Tensor& z, const std::vector<int>& y, double tau) {
  ad::Tape tape;
  return SclLoss(tape.Constant(z), y, tau).value()[0];
}

double Intra(const Tensor& z, const std::vector<int>& y, const std::vector<double>& prior,
             double tau, double t) {
  ad::Tape tape;
  return IntraLoss(tape.Constant(z), y, prior, tau, t).value()[0];
}

double Inter(const Tensor& z, const std::vector<int>& y, const Tensor& v, double tau) {
  ad::Tape tape;
  return InterLoss(tape.Constant(z), y, v, tau).value()[0];
}

double Ce(const Tensor& logits, const std::vector<int>& y) {
  ad::Tape tape;
  return CeLoss(tape.Constant(logits), y).value()[0];
}

double Dala(const Tensor& logits, const std::vector<int>& y, const MarginTable& m) {
  ad::Tape tape;
  return DalaLoss(tape.Constant(logits), y, m).value()[0];
}

TEST(SclTest, TwoSameClassSamplesGiveZero) {
  const Tensor z = UnitRows(RandomMatrix(2, 4, 1));
  EXPECT_NEAR(Scl(z, {3, 3}, 0.1), 0.0, 1e-12);
}

TEST(SclTest, IdenticalEmbeddingsTwoClasses) {
  Tensor z({4, 3}, 0.0);
  for (std::size_t i = 0; i < 4; ++i) z(i, 0) = 1.0;
  EXPECT_NEAR(Scl(z, {0, 0, 1, 1}, 0.1), 4.0 * std::log(3.0), 1e-12);
}

TEST(SclTest, MatchesLoopOracleAndIsNonNegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor z = UnitRows(RandomMatrix(12, 5, seed));
    const auto y = RandomLabels(12, 3, seed + 50);
    const double got = Scl(z, y, 0.2);
    EXPECT_NEAR(got, ContrastiveOracle(z, y, [](int, int) { return 0.2; }),
                1e-9 * std::max(1.0, got));
    EXPECT_GE(got, 0.0);
  }
}

TEST(SclTest, SingletonAnchorsContributeNothing) {
  const Tensor z = UnitRows(RandomMatrix(3, 4, 2));
  EXPECT_EQ(Scl(z, {0, 1, 2}, 0.1), 0.0);
}

TEST(DynamicTemperatureTest, Examples) {
  EXPECT_NEAR(DynamicTemperature(0.5, 0.5, 0.1, 0.5), 0.05, 1e-15);
  EXPECT_NEAR(DynamicTemperature(0.9, 0.1, 0.1, 0.5), 0.03, 1e-15);
  EXPECT_EQ(DynamicTemperature(0.3, 0.01, 0.1, 0.0), 0.1);
  EXPECT_THROW(DynamicTemperature(0.0, 0.5, 0.1, 0.5), ContractError);
  EXPECT_THROW(DynamicTemperature(0.5, 0.5, 0.0, 0.5), ContractError);
}

TEST(IntraTest, ZeroExponentIsBitIdenticalToScl) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor z = UnitRows(RandomMatrix(10, 4, seed));
    const auto y = RandomLabels(10, 3, seed + 7);
    EXPECT_EQ(Intra(z, y, {0.7, 0.2, 0.1}, 0.1, 0.0), Scl(z, y, 0.1));
  }
}

TEST(IntraTest, UniformPriorReducesToScaledTemperature) {
  const int L = 4;
  const Tensor z = UnitRows(RandomMatrix(10, 4, 3));
  const auto y = RandomLabels(10, L, 4);
  const double tau = 0.1, t = 0.5;
  const double reduced = std::pow(1.0 / (L * L), t) * tau;
  EXPECT_NEAR(Intra(z, y, std::vector<double>(L, 1.0 / L), tau, t), Scl(z, y, reduced), 1e-9);
}

TEST(IntraTest, MatchesPairwiseTemperatureOracle) {
  const std::vector<double> prior = {0.6, 0.3, 0.1};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor z = UnitRows(RandomMatrix(9, 4, seed + 20));
    const auto y = RandomLabels(9, 3, seed + 30);
    const double oracle = ContrastiveOracle(z, y, [&](int a, int b) {
      return std::sqrt(prior[a] * prior[b]) * 0.5;
    });
    EXPECT_NEAR(Intra(z, y, prior, 0.5, 0.5), oracle, 1e-9 * std::max(1.0, oracle));
  }
}

TEST(IntraTest, TwoSameClassSamplesGiveZero) {
  const Tensor z = UnitRows(RandomMatrix(2, 3, 5));
  EXPECT_NEAR(Intra(z, {1, 1}, {0.5, 0.5}, 0.1, 0.5), 0.0, 1e-12);
}

TEST(IntraTest, ClassWithoutPriorRejected) {
  const Tensor z = UnitRows(RandomMatrix(2, 3, 5));
  EXPECT_THROW(Intra(z, {0, 1}, {1.0, 0.0}, 0.1, 0.5), ContractError);
}

TEST(InterTest, AlignedWithAntipodalPrototype) {
  const Tensor v = Tensor::Matrix(2, 2, {1, 0, -1, 0});
  const double expected = std::log1p(std::exp(-20.0));
  EXPECT_NEAR(Inter(Tensor::Matrix(1, 2, {1, 0}), {0}, v, 0.1), expected, 1e-15);
  EXPECT_NEAR(expected, 2.1e-9, 0.05e-9);
}

TEST(InterTest, OrthogonalEmbeddingGivesLogL) {
  const Tensor v = Tensor::Matrix(3, 3, {1, 0, 0, 0, 1, 0, -1, 0, 0});
  EXPECT_NEAR(Inter(Tensor::Matrix(1, 3, {0, 0, 1}), {2}, v, 0.1), std::log(3.0), 1e-12);
  // Two same-class anchors each carry weight 1/2.
  EXPECT_NEAR(Inter(Tensor::Matrix(2, 3, {0, 0, 1, 0, 0, -1}), {1, 1}, v, 0.1), std::log(3.0),
              1e-12);
}

TEST(InterTest, MatchesOracleAndPermutationInvariant) {
  const Tensor v = UnitRows(RandomMatrix(4, 5, 99));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor z = UnitRows(RandomMatrix(8, 5, seed));
    auto y = RandomLabels(8, 4, seed + 1);
    const double got = Inter(z, y, v, 0.1);
    EXPECT_NEAR(got, InterOracle(z, y, v, 0.1), 1e-9 * std::max(1.0, got));
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[1], perm[5]);
    Tensor zp(z.shape());
    std::vector<int> yp(8);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t k = 0; k < 5; ++k) zp(i, k) = z(perm[i], k);
      yp[i] = y[perm[i]];
    }
    EXPECT_NEAR(Inter(zp, yp, v, 0.1), got, 1e-12 * std::max(1.0, got));
  }
}

TEST(InterTest, LabelOutOfRangeRejected) {
  const Tensor v = Tensor::Matrix(2, 2, {1, 0, -1, 0});
  EXPECT_THROW(Inter(Tensor::Matrix(1, 2, {1, 0}), {2}, v, 0.1), ContractError);
}

TEST(CeTest, Examples) {
  EXPECT_NEAR(Ce(Tensor({3, 5}, 0.0), {0, 4, 2}), std::log(5.0), 1e-14);
  EXPECT_LT(Ce(Tensor::Matrix(1, 2, {50, 0}), {0}), 1e-20);
  EXPECT_NEAR(Ce(Tensor::Matrix(1, 2, {1, 0}), {0}), std::log(1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(std::log(1.0 + std::exp(-1.0)), 0.3133, 5e-5);
}

TEST(CeTest, MatchesOracle) {
  const Tensor logits = RandomMatrix(6, 4, 3, 3.0);
  const auto y = RandomLabels(6, 4, 4);
  EXPECT_NEAR(Ce(logits, y), CeOracle(logits, y), 1e-12);
}

TEST(MarginTest, SmoothedPrior) {
  const std::vector<std::int64_t> counts = {3, 0};
  const auto p = SmoothedPrior(counts);
  EXPECT_DOUBLE_EQ(p[0], 0.8);
  EXPECT_DOUBLE_EQ(p[1], 0.2);
}

TEST(MarginTest, HandComputedTable) {
  const MarginTable m = MarginsFromPriors(std::vector<double>{0.9, 0.1},
                                          std::vector<double>{0.5, 2.0}, 0.25);
  EXPECT_NEAR(m.margins[0], std::log(0.9 / std::pow(0.5, 0.25)), 1e-14);
  EXPECT_NEAR(m.margins[1], std::log(0.1 / std::pow(2.0, 0.25)), 1e-14);
  EXPECT_NEAR(m.margins[0], 0.0679, 5e-5);
  EXPECT_NEAR(m.margins[1], -2.4759, 5e-5);
}

TEST(MarginTest, ZeroExponentIsPriorOnly) {
  const std::vector<std::int64_t> counts = {50, 30, 0, 20};
  const MarginTable m = DalaMargins(counts, std::vector<double>{0.1, 3.0, 1.0, 7.0}, 0.0);
  const auto p = SmoothedPrior(counts);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.margins[c], std::log(p[c]));
}

TEST(MarginTest, UniformPriorEqualLossesGiveEqualMargins) {
  const std::vector<std::int64_t> counts = {10, 10, 10};
  const MarginTable m = DalaMargins(counts, std::vector<double>{0.7, 0.7, 0.7}, 0.25);
  EXPECT_EQ(m.margins[0], m.margins[1]);
  EXPECT_EQ(m.margins[1], m.margins[2]);
}

TEST(MarginTest, LossFloorAndAbsentClasses) {
  const std::vector<std::int64_t> counts = {4, 0};
  const MarginTable m = DalaMarginsFromTotals(counts, std::vector<double>{0.0, 0.0}, 0.5);
  EXPECT_EQ(m.mean_losses[1], 1.0);
  EXPECT_NEAR(m.margins[0], std::log(5.0 / 6.0) - 0.5 * std::log(kMeanLossFloor), 1e-12);
  EXPECT_NEAR(m.margins[1], std::log(1.0 / 6.0), 1e-12);
  EXPECT_THROW(DalaMargins(std::vector<std::int64_t>{0, 0}, std::vector<double>{1, 1}, 0.25),
               ContractError);
}

TEST(DalaTest, ZeroMarginsBitIdenticalToCe) {
  const Tensor logits = RandomMatrix(7, 3, 8);
  const auto y = RandomLabels(7, 3, 9);
  EXPECT_EQ(Dala(logits, y, ZeroMargins(3)), Ce(logits, y));
}

TEST(DalaTest, ConstantShiftInvariantAndMatchesOracle) {
  const Tensor logits = RandomMatrix(7, 3, 8);
  const auto y = RandomLabels(7, 3, 9);
  MarginTable m = MarginsFromPriors(std::vector<double>{0.6, 0.3, 0.1},
                                    std::vector<double>{0.2, 1.0, 2.5}, 0.25);
  const double base = Dala(logits, y, m);
  Tensor shifted = logits;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t c = 0; c < 3; ++c) shifted(i, c) += m.margins[c];
  EXPECT_NEAR(base, CeOracle(shifted, y), 1e-12);
  for (double& v : m.margins) v += 4.5;
  EXPECT_NEAR(Dala(logits, y, m), base, 1e-12);
}

TEST(TotalLossTest, WeightsAndLinearity) {
  ad::Tape tape;
  ad::Var dala = tape.Leaf(Tensor::Scalar(1.5));
  ad::Var intra = tape.Leaf(Tensor::Scalar(2.0));
  ad::Var inter = tape.Leaf(Tensor::Scalar(-0.5));
  LossConfig c;
  c.k1 = c.k2 = 0.0;
  EXPECT_EQ(TotalLoss(dala, &intra, &inter, c).value()[0], 1.5);
  c.k1 = 2.0;
  c.k2 = 2.0;
  EXPECT_NO_THROW(c.Validate());
  const double a = TotalLoss(dala, &intra, &inter, c).value()[0];
  c.k1 = 4.0;
  const double b = TotalLoss(dala, &intra, &inter, c).value()[0];
  EXPECT_DOUBLE_EQ(b - 1.5 + 1.0, 2.0 * (a - 1.5 + 1.0));
  EXPECT_EQ(TotalLoss(dala, nullptr, nullptr, c).value()[0], 1.5);
}

TEST(LossConfigTest, RejectsInvalid) {
  LossConfig c;
  c.tau = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = LossConfig{};
  c.k2 = -1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

// Unnormalized leaf pushed through RowL2Normalize so the check covers the
// path a real embedding takes.
TEST(LossGradientTest, ContrastiveLossesMatchFiniteDifferences) {
  const std::vector<double> prior = {0.5, 0.3, 0.2};
  const Tensor v = UnitRows(RandomMatrix(3, 4, 77));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = RandomLabels(8, 3, seed + 40);
    const std::vector<Tensor> leaves = {RandomMatrix(8, 4, seed)};
    const auto scl = [&](ad::Tape&, std::span<const ad::Var> l) {
      return SclLoss(ad::RowL2Normalize(l[0]), y, 0.5);
    };
    const auto intra = [&](ad::Tape&, std::span<const ad::Var> l) {
      return IntraLoss(ad::RowL2Normalize(l[0]), y, prior, 0.5, 0.5);
    };
    const auto inter = [&](ad::Tape&, std::span<const ad::Var> l) {
      return InterLoss(ad::RowL2Normalize(l[0]), y, v, 0.5);
    };
    EXPECT_TRUE(ad::FiniteDifferenceCheck(scl, leaves, {}).passed()) << seed;
    EXPECT_TRUE(ad::FiniteDifferenceCheck(intra, leaves, {}).passed()) << seed;
    EXPECT_TRUE(ad::FiniteDifferenceCheck(inter, leaves, {}).passed()) << seed;
  }
}

TEST(LossGradientTest, DalaMatchesFiniteDifferences) {
  const MarginTable m = MarginsFromPriors(std::vector<double>{0.6, 0.3, 0.1},
                                          std::vector<double>{0.2, 1.0, 2.5}, 0.25);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = RandomLabels(6, 3, seed + 60);
    const std::vector<Tensor> leaves = {RandomMatrix(6, 3, seed, 2.0)};
    const auto dala = [&](ad::Tape&, std::span<const ad::Var> l) {
      return DalaLoss(l[0], y, m);
    };
    EXPECT_TRUE(ad::FiniteDifferenceCheck(dala, leaves, {}).passed()) << seed;
  }
}

}  // namespace
}  // namespace fediic
