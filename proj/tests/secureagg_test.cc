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

#include "fediic/errors.h"
#include "fediic/random.h"
#include "fediic/secure_aggregation.h"

namespace fediic {
namespace {

using paillier::Ciphertext;
using paillier::KeyPair;

const KeyPair& Keys512() {
  static const KeyPair keys = paillier::GenerateKeyPair(512, 1);
  return keys;
}

mpz_class RandomBelow(gmp_randclass& r, const mpz_class& n) { return r.get_z_range(n); }

TEST(PaillierTest, RoundTripRandomPlaintexts) {
  const KeyPair& k = Keys512();
  EXPECT_GE(mpz_sizeinbase(k.public_key.n.get_mpz_t(), 2), 511u);
  paillier::Randomness rng(2);
  gmp_randclass pick(gmp_randinit_mt);
  pick.seed(3);
  for (int i = 0; i < 100; ++i) {
    const mpz_class m = RandomBelow(pick, k.public_key.n);
    EXPECT_EQ(paillier::Decrypt(k.public_key, k.private_key,
                                paillier::Encrypt(k.public_key, m, rng)),
              m);
  }
}

TEST(PaillierTest, BoundaryPlaintexts) {
  const KeyPair& k = Keys512();
  paillier::Randomness rng(4);
  const auto& pk = k.public_key;
  EXPECT_EQ(paillier::Decrypt(pk, k.private_key, paillier::Encrypt(pk, 0, rng)), 0);
  const mpz_class top = pk.n - 1;
  EXPECT_EQ(paillier::Decrypt(pk, k.private_key, paillier::Encrypt(pk, top, rng)), top);
  EXPECT_THROW(paillier::Encrypt(pk, pk.n, rng), ContractError);
  EXPECT_THROW(paillier::Encrypt(pk, -1, rng), ContractError);
  EXPECT_THROW(paillier::Encrypt(pk, 5, mpz_class(0)), ContractError);
}

TEST(PaillierTest, EncryptionIsRandomized) {
  const KeyPair& k = Keys512();
  paillier::Randomness rng(5);
  const Ciphertext a = paillier::Encrypt(k.public_key, 42, rng);
  const Ciphertext b = paillier::Encrypt(k.public_key, 42, rng);
  EXPECT_NE(a.value(), b.value());
  EXPECT_LT(a.value(), k.public_key.n_squared);
}

TEST(PaillierTest, AdditionIsHomomorphic) {
  const KeyPair& k = Keys512();
  const auto& pk = k.public_key;
  paillier::Randomness rng(6);
  auto sum = [&](const mpz_class& a, const mpz_class& b) {
    return paillier::Decrypt(pk, k.private_key,
                             paillier::Add(pk, paillier::Encrypt(pk, a, rng),
                                           paillier::Encrypt(pk, b, rng)));
  };
  EXPECT_EQ(sum(3, 4), 7);
  EXPECT_EQ(sum(pk.n - 1, 1), 0);
  gmp_randclass pick(gmp_randinit_mt);
  pick.seed(7);
  for (int i = 0; i < 1000; ++i) {
    const mpz_class a = RandomBelow(pick, pk.n);
    const mpz_class b = RandomBelow(pick, pk.n);
    const mpz_class expected = (a + b) % pk.n;
    ASSERT_EQ(sum(a, b), expected) << i;
  }
}

TEST(PaillierTest, MixedKeysRejected) {
  const KeyPair other = paillier::GenerateKeyPair(256, 9);
  paillier::Randomness rng(8);
  const Ciphertext a = paillier::Encrypt(Keys512().public_key, 1, rng);
  const Ciphertext b = paillier::Encrypt(other.public_key, 1, rng);
  EXPECT_THROW(paillier::Add(Keys512().public_key, a, b), ContractError);
  EXPECT_THROW(paillier::Decrypt(other.public_key, other.private_key, a), ContractError);
}

TEST(PaillierTest, KeygenDeterministicAndBounded) {
  EXPECT_EQ(paillier::GenerateKeyPair(256, 11).public_key,
            paillier::GenerateKeyPair(256, 11).public_key);
  EXPECT_FALSE(paillier::GenerateKeyPair(256, 11).public_key ==
               paillier::GenerateKeyPair(256, 12).public_key);
  EXPECT_THROW(paillier::GenerateKeyPair(128, 1), ContractError);
}

TEST(PaillierTest, KeyJsonRoundTrip) {
  const KeyPair& k = Keys512();
  const auto doc = paillier::KeyPairToJson(k);
  EXPECT_EQ(doc["not_for_production"], true);
  const KeyPair back = paillier::KeyPairFromJson(doc);
  EXPECT_EQ(back.public_key, k.public_key);
  EXPECT_EQ(back.private_key.lambda, k.private_key.lambda);
  EXPECT_EQ(paillier::PublicKeyFromJson(paillier::PublicKeyToJson(k.public_key)), k.public_key);
}

TEST(FixedPointTest, EncodesSignedValues) {
  const FixedPointCodec codec;
  EXPECT_EQ(codec.quantum(), std::ldexp(1.0, -16));
  EXPECT_EQ(codec.DecodeSum(codec.Encode(-2.5), 1), -2.5);
  EXPECT_EQ(codec.DecodeSum(codec.Encode(1.0) + codec.Encode(-3.0), 2), -2.0);
}

TEST(SecureSumTest, LossesWithinQuantum) {
  std::vector<ClassStats> parts;
  for (double loss : {1.0, 2.0, 3.0}) parts.push_back(ClassStats{{1}, {loss}});
  const ClassStats s = SecureSum(Keys512(), parts, FixedPointCodec(), 10);
  EXPECT_EQ(s.counts[0], 3);
  EXPECT_NEAR(s.loss_totals[0], 6.0, 3 * std::ldexp(1.0, -16));
}

TEST(SecureSumTest, MatchesPlainSumOnRandomStats) {
  Rng rng(12);
  std::uniform_int_distribution<int> count(0, 400);
  std::uniform_real_distribution<double> loss(0.0, 300.0);
  std::vector<ClassStats> parts(5, ClassStats::Zeros(4));
  for (auto& p : parts)
    for (int c = 0; c < 4; ++c) p.counts[c] = count(rng), p.loss_totals[c] = loss(rng);
  const ClassStats plain = PlainSum(parts);
  const ClassStats secure = SecureSum(Keys512(), parts, FixedPointCodec(), 13);
  EXPECT_EQ(secure.counts, plain.counts);
  for (int c = 0; c < 4; ++c)
    EXPECT_NEAR(secure.loss_totals[c], plain.loss_totals[c], 5 * std::ldexp(1.0, -16));
}

TEST(SecureSumTest, SingleClientIsIdentity) {
  const std::vector<ClassStats> one = {ClassStats{{7, 0}, {0.25, 0.0}}};
  const ClassStats s = SecureSum(Keys512(), one, FixedPointCodec(), 14);
  EXPECT_EQ(s.counts, one[0].counts);
  EXPECT_EQ(s.loss_totals, one[0].loss_totals);
}

TEST(AggregationServerTest, ScaleMismatchIsProtocolError) {
  const KeyPair& k = Keys512();
  paillier::Randomness rng(15);
  const ClassStats stats{{1}, {0.5}};
  AggregationServer server(k.public_key);
  EXPECT_THROW(server.aggregate(), ProtocolError);
  server.Accept(EncryptStats(k.public_key, stats, FixedPointCodec(16), rng));
  EXPECT_THROW(server.Accept(EncryptStats(k.public_key, stats, FixedPointCodec(20), rng)),
               ProtocolError);
  EXPECT_EQ(server.contributions(), 1u);
}

TEST(AggregationServerTest, AggregateDecryptsToSum) {
  const KeyPair& k = Keys512();
  paillier::Randomness rng(16);
  const FixedPointCodec codec;
  AggregationServer server(k.public_key);
  server.Accept(EncryptStats(k.public_key, ClassStats{{2, 1}, {0.5, 4.0}}, codec, rng));
  server.Accept(EncryptStats(k.public_key, ClassStats{{3, 0}, {1.25, 0.0}}, codec, rng));
  const ClassStats s = KeyHolder(k, codec).Decrypt(server.aggregate());
  EXPECT_EQ(s.counts, (std::vector<std::int64_t>{5, 1}));
  EXPECT_EQ(s.loss_totals, (std::vector<double>{1.75, 4.0}));
}

TEST(CiphertextJsonTest, EnvelopeRoundTrip) {
  const KeyPair& k = Keys512();
  paillier::Randomness rng(17);
  const Ciphertext c = paillier::Encrypt(k.public_key, 99, rng);
  const auto doc = CiphertextToJson(c, 16);
  EXPECT_TRUE(doc.contains("n"));
  EXPECT_TRUE(doc.contains("c"));
  EXPECT_EQ(doc["scale"], 16);
  int scale = 0;
  const Ciphertext back = CiphertextFromJson(doc, &scale);
  EXPECT_EQ(scale, 16);
  EXPECT_EQ(back.value(), c.value());
  EXPECT_EQ(paillier::Decrypt(k.public_key, k.private_key, back), 99);
  EXPECT_THROW(CiphertextFromJson(nlohmann::json{{"c", "zz"}}), DataError);
}

}  // namespace
}  // namespace fediic
