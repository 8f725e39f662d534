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

// Paillier cryptosystem over GMP integers with generator g = n + 1.
// Key sizes here are desk scale and must not be used to protect real data.

#ifndef FEDIIC_PAILLIER_H_
#define FEDIIC_PAILLIER_H_

#include <gmpxx.h>

#include <cstdint>
#include <utility>

#include "json.hpp"

namespace fediic::paillier {

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
  int bits = 0;

  friend bool operator==(const PublicKey& a, const PublicKey& b) {
    return a.n == b.n;
  }
};

struct PrivateKey {
  mpz_class lambda;  // lcm(p - 1, q - 1)
  mpz_class mu;      // lambda^-1 mod n
};

struct KeyPair {
  PublicKey public_key;
  PrivateKey private_key;
};

// Deterministic for a given seed. Throws ContractError for key_bits < 256 and
// CryptoError when no valid prime pair is found within the retry budget.
KeyPair GenerateKeyPair(int key_bits, std::uint64_t seed);

class Ciphertext {
 public:
  Ciphertext() = default;
  Ciphertext(mpz_class value, mpz_class modulus)
      : value_(std::move(value)), modulus_(std::move(modulus)) {}

  const mpz_class& value() const { return value_; }
  // The n of the key this ciphertext was produced under.
  const mpz_class& modulus() const { return modulus_; }

 private:
  mpz_class value_;
  mpz_class modulus_;
};

// Source of encryption randomness r in [1, n) coprime to n.
class Randomness {
 public:
  explicit Randomness(std::uint64_t seed);
  mpz_class Draw(const PublicKey& pk);

 private:
  gmp_randclass state_;
};

// Requires 0 <= m < n and gcd(r, n) = 1; throws ContractError otherwise.
Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, const mpz_class& r);
Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, Randomness& rng);
mpz_class Decrypt(const PublicKey& pk, const PrivateKey& sk, const Ciphertext& c);

// Ciphertext product mod n^2; decrypts to (a + b) mod n. Throws ContractError
// when either operand was produced under a different key.
Ciphertext Add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

// Hex-string JSON forms.
nlohmann::json PublicKeyToJson(const PublicKey& pk);
PublicKey PublicKeyFromJson(const nlohmann::json& doc);
nlohmann::json KeyPairToJson(const KeyPair& keys);
KeyPair KeyPairFromJson(const nlohmann::json& doc);

}  // namespace fediic::paillier

#endif  // FEDIIC_PAILLIER_H_
