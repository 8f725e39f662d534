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

// Per-class statistics and their encrypted summation. The aggregation server
// only ever holds a public key; the key holder decrypts the final sums.

#ifndef FEDIIC_SECURE_AGGREGATION_H_
#define FEDIIC_SECURE_AGGREGATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "fediic/paillier.h"
#include "json.hpp"

namespace fediic {

// Per-class sample counts and summed cross-entropy losses.
struct ClassStats {
  std::vector<std::int64_t> counts;
  std::vector<double> loss_totals;

  static ClassStats Zeros(int num_classes);
  std::size_t num_classes() const { return counts.size(); }
  void Accumulate(const ClassStats& other);
};

ClassStats PlainSum(std::span<const ClassStats> parts);

// Reals as round(v * 2^scale_bits) + offset, so that negative values stay in
// the non-negative plaintext space. Integers (counts) are encoded verbatim.
class FixedPointCodec {
 public:
  explicit FixedPointCodec(int scale_bits = 16, int offset_bits = 62);

  int scale_bits() const { return scale_bits_; }
  double quantum() const;
  mpz_class Encode(double value) const;
  // Inverse for a sum of `summands` encoded values.
  double DecodeSum(const mpz_class& sum, std::size_t summands) const;

 private:
  int scale_bits_;
  mpz_class scale_;
  mpz_class offset_;
};

struct EncryptedStats {
  std::vector<paillier::Ciphertext> counts;
  std::vector<paillier::Ciphertext> loss_totals;
  int scale_bits = 16;
  std::size_t summands = 1;
};

EncryptedStats EncryptStats(const paillier::PublicKey& pk, const ClassStats& stats,
                            const FixedPointCodec& codec, paillier::Randomness& rng);

// {"n": hex, "c": hex, "scale": int}
nlohmann::json CiphertextToJson(const paillier::Ciphertext& c, int scale_bits);
paillier::Ciphertext CiphertextFromJson(const nlohmann::json& doc,
                                        int* scale_bits = nullptr);

class AggregationServer {
 public:
  explicit AggregationServer(paillier::PublicKey pk) : pk_(std::move(pk)) {}

  // Multiplies `part` into the running aggregate. Throws ProtocolError when
  // the fixed-point scale differs from earlier contributions.
  void Accept(const EncryptedStats& part);
  std::size_t contributions() const { return contributions_; }
  // Throws ProtocolError before the first contribution.
  const EncryptedStats& aggregate() const;

 private:
  paillier::PublicKey pk_;
  std::optional<EncryptedStats> aggregate_;
  std::size_t contributions_ = 0;
};

static_assert(!std::is_constructible_v<AggregationServer, paillier::PrivateKey>);
static_assert(!std::is_constructible_v<AggregationServer, paillier::KeyPair>);

class KeyHolder {
 public:
  KeyHolder(paillier::KeyPair keys, FixedPointCodec codec)
      : keys_(std::move(keys)), codec_(codec) {}

  const paillier::PublicKey& public_key() const { return keys_.public_key; }
  ClassStats Decrypt(const EncryptedStats& aggregate) const;

 private:
  paillier::KeyPair keys_;
  FixedPointCodec codec_;
};

// Encrypts each part in order, aggregates on a server, decrypts the result.
ClassStats SecureSum(const paillier::KeyPair& keys, std::span<const ClassStats> parts,
                     const FixedPointCodec& codec, std::uint64_t seed);

}  // namespace fediic

#endif  // FEDIIC_SECURE_AGGREGATION_H_
