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

#include "fediic/paillier.h"

#include <string>

#include "fediic/errors.h"

namespace fediic::paillier {

namespace {

constexpr int kMaxPrimeAttempts = 64;

mpz_class RandomPrime(gmp_randclass& rng, int bits) {
  mpz_class candidate = rng.get_z_bits(bits);
  mpz_setbit(candidate.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1));
  mpz_setbit(candidate.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 2));
  mpz_class prime;
  mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
  return prime;
}

PublicKey MakePublicKey(const mpz_class& n) {
  PublicKey pk;
  pk.n = n;
  pk.n_squared = n * n;
  pk.bits = static_cast<int>(mpz_sizeinbase(n.get_mpz_t(), 2));
  return pk;
}

std::string Hex(const mpz_class& v) { return v.get_str(16); }

mpz_class FromHex(const nlohmann::json& doc, const char* key) {
  try {
    mpz_class v;
    if (v.set_str(doc.at(key).get<std::string>(), 16) != 0) {
      throw DataError(std::string("field '") + key + "' is not a hex integer");
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("key document: ") + e.what());
  }
}

}  // namespace

KeyPair GenerateKeyPair(int key_bits, std::uint64_t seed) {
  if (key_bits < 256) throw ContractError("keygen: key_bits must be >= 256");
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(mpz_class(std::to_string(seed)));
  const int half = key_bits / 2;
  for (int attempt = 0; attempt < kMaxPrimeAttempts; ++attempt) {
    const mpz_class p = RandomPrime(rng, half);
    const mpz_class q = RandomPrime(rng, key_bits - half);
    if (p == q) continue;
    const mpz_class n = p * q;
    if (static_cast<int>(mpz_sizeinbase(n.get_mpz_t(), 2)) != key_bits) continue;
    const mpz_class pm1 = p - 1;
    const mpz_class qm1 = q - 1;
    mpz_class g;
    const mpz_class phi = pm1 * qm1;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    KeyPair keys;
    keys.public_key = MakePublicKey(n);
    mpz_lcm(keys.private_key.lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    if (mpz_invert(keys.private_key.mu.get_mpz_t(),
                   keys.private_key.lambda.get_mpz_t(), n.get_mpz_t()) == 0) {
      continue;
    }
    return keys;
  }
  throw CryptoError("keygen: no valid prime pair after " +
                    std::to_string(kMaxPrimeAttempts) + " attempts");
}

Randomness::Randomness(std::uint64_t seed) : state_(gmp_randinit_mt) {
  state_.seed(mpz_class(std::to_string(seed)));
}

mpz_class Randomness::Draw(const PublicKey& pk) {
  while (true) {
    mpz_class r = state_.get_z_range(pk.n);
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (g == 1) return r;
  }
}

Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, const mpz_class& r) {
  if (m < 0 || m >= pk.n) throw ContractError("encrypt: plaintext outside [0, n)");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  if (r <= 0 || r >= pk.n || g != 1) {
    throw ContractError("encrypt: randomness must be a unit modulo n");
  }
  // (1 + n)^m = 1 + m n  (mod n^2)
  mpz_class c = (1 + m * pk.n) % pk.n_squared;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n_squared.get_mpz_t());
  c = (c * rn) % pk.n_squared;
  return Ciphertext(std::move(c), pk.n);
}

Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, Randomness& rng) {
  return Encrypt(pk, m, rng.Draw(pk));
}

mpz_class Decrypt(const PublicKey& pk, const PrivateKey& sk, const Ciphertext& c) {
  if (c.modulus() != pk.n) throw ContractError("decrypt: ciphertext from another key");
  if (c.value() <= 0 || c.value() >= pk.n_squared) {
    throw ContractError("decrypt: ciphertext outside (0, n^2)");
  }
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.value().get_mpz_t(), sk.lambda.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  mpz_class l = (u - 1) / pk.n;
  return (l * sk.mu) % pk.n;
}

Ciphertext Add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  if (a.modulus() != pk.n || b.modulus() != pk.n) {
    throw ContractError("add: ciphertexts were produced under different keys");
  }
  return Ciphertext((a.value() * b.value()) % pk.n_squared, pk.n);
}

nlohmann::json PublicKeyToJson(const PublicKey& pk) {
  return {{"n", Hex(pk.n)}, {"bits", pk.bits}, {"not_for_production", true}};
}

PublicKey PublicKeyFromJson(const nlohmann::json& doc) {
  return MakePublicKey(FromHex(doc, "n"));
}

nlohmann::json KeyPairToJson(const KeyPair& keys) {
  nlohmann::json doc = PublicKeyToJson(keys.public_key);
  doc["lambda"] = Hex(keys.private_key.lambda);
  doc["mu"] = Hex(keys.private_key.mu);
  return doc;
}

KeyPair KeyPairFromJson(const nlohmann::json& doc) {
  KeyPair keys;
  keys.public_key = PublicKeyFromJson(doc);
  keys.private_key.lambda = FromHex(doc, "lambda");
  keys.private_key.mu = FromHex(doc, "mu");
  return keys;
}

}  // namespace fediic::paillier
