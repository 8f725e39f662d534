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

#include "fediic/secure_aggregation.h"

#include <cmath>
#include <string>

#include "fediic/errors.h"

namespace fediic {

ClassStats ClassStats::Zeros(int num_classes) {
  ClassStats s;
  s.counts.assign(static_cast<std::size_t>(num_classes), 0);
  s.loss_totals.assign(static_cast<std::size_t>(num_classes), 0.0);
  return s;
}

void ClassStats::Accumulate(const ClassStats& other) {
  if (other.counts.size() != counts.size() ||
      other.loss_totals.size() != loss_totals.size()) {
    throw StructuralError("class stats: class count mismatch");
  }
  for (std::size_t y = 0; y < counts.size(); ++y) {
    counts[y] += other.counts[y];
    loss_totals[y] += other.loss_totals[y];
  }
}

ClassStats PlainSum(std::span<const ClassStats> parts) {
  if (parts.empty()) throw ContractError("class stats: nothing to sum");
  ClassStats total = ClassStats::Zeros(static_cast<int>(parts.front().num_classes()));
  for (const ClassStats& p : parts) total.Accumulate(p);
  return total;
}

FixedPointCodec::FixedPointCodec(int scale_bits, int offset_bits)
    : scale_bits_(scale_bits) {
  if (scale_bits < 0 || scale_bits > 52 || offset_bits < 0) {
    throw ConfigError("fixed point: scale_bits must be in [0, 52]");
  }
  mpz_ui_pow_ui(scale_.get_mpz_t(), 2, static_cast<unsigned long>(scale_bits));
  mpz_ui_pow_ui(offset_.get_mpz_t(), 2, static_cast<unsigned long>(offset_bits));
}

double FixedPointCodec::quantum() const { return std::ldexp(1.0, -scale_bits_); }

mpz_class FixedPointCodec::Encode(double value) const {
  if (!std::isfinite(value)) throw NumericError("fixed point: non-finite value");
  mpz_class scaled;
  mpz_set_d(scaled.get_mpz_t(), std::nearbyint(std::ldexp(value, scale_bits_)));
  mpz_class encoded = scaled + offset_;
  if (encoded < 0) throw ContractError("fixed point: value below the offset range");
  return encoded;
}

double FixedPointCodec::DecodeSum(const mpz_class& sum, std::size_t summands) const {
  const mpz_class shifted = sum - offset_ * static_cast<unsigned long>(summands);
  return std::ldexp(shifted.get_d(), -scale_bits_);
}

EncryptedStats EncryptStats(const paillier::PublicKey& pk, const ClassStats& stats,
                            const FixedPointCodec& codec, paillier::Randomness& rng) {
  EncryptedStats out;
  out.scale_bits = codec.scale_bits();
  out.summands = 1;
  for (std::int64_t c : stats.counts) {
    if (c < 0) throw ContractError("secure sum: negative count");
    out.counts.push_back(paillier::Encrypt(pk, mpz_class(std::to_string(c)), rng));
  }
  for (double v : stats.loss_totals)
    out.loss_totals.push_back(paillier::Encrypt(pk, codec.Encode(v), rng));
  return out;
}

nlohmann::json CiphertextToJson(const paillier::Ciphertext& c, int scale_bits) {
  return {{"n", c.modulus().get_str(16)},
          {"c", c.value().get_str(16)},
          {"scale", scale_bits}};
}

paillier::Ciphertext CiphertextFromJson(const nlohmann::json& doc, int* scale_bits) {
  try {
    mpz_class n, c;
    if (n.set_str(doc.at("n").get<std::string>(), 16) != 0 ||
        c.set_str(doc.at("c").get<std::string>(), 16) != 0) {
      throw DataError("ciphertext envelope: malformed hex");
    }
    if (scale_bits) *scale_bits = doc.at("scale").get<int>();
    return paillier::Ciphertext(std::move(c), std::move(n));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ciphertext envelope: ") + e.what());
  }
}

void AggregationServer::Accept(const EncryptedStats& part) {
  if (!aggregate_) {
    aggregate_ = part;
    contributions_ = 1;
    return;
  }
  if (part.scale_bits != aggregate_->scale_bits) {
    throw ProtocolError("secure sum: contribution scale 2^" +
                        std::to_string(part.scale_bits) + " differs from 2^" +
                        std::to_string(aggregate_->scale_bits));
  }
  if (part.counts.size() != aggregate_->counts.size() ||
      part.loss_totals.size() != aggregate_->loss_totals.size()) {
    throw ProtocolError("secure sum: contribution has a different class count");
  }
  for (std::size_t y = 0; y < part.counts.size(); ++y) {
    aggregate_->counts[y] = paillier::Add(pk_, aggregate_->counts[y], part.counts[y]);
    aggregate_->loss_totals[y] =
        paillier::Add(pk_, aggregate_->loss_totals[y], part.loss_totals[y]);
  }
  aggregate_->summands += part.summands;
  ++contributions_;
}

const EncryptedStats& AggregationServer::aggregate() const {
  if (!aggregate_) throw ProtocolError("secure sum: no contributions received");
  return *aggregate_;
}

ClassStats KeyHolder::Decrypt(const EncryptedStats& aggregate) const {
  if (aggregate.scale_bits != codec_.scale_bits()) {
    throw ProtocolError("secure sum: aggregate scale differs from the key holder's");
  }
  const auto& pk = keys_.public_key;
  const auto& sk = keys_.private_key;
  ClassStats out;
  for (const auto& c : aggregate.counts) {
    const mpz_class m = paillier::Decrypt(pk, sk, c);
    out.counts.push_back(std::stoll(m.get_str(10)));
  }
  for (const auto& c : aggregate.loss_totals) {
    out.loss_totals.push_back(
        codec_.DecodeSum(paillier::Decrypt(pk, sk, c), aggregate.summands));
  }
  return out;
}

ClassStats SecureSum(const paillier::KeyPair& keys, std::span<const ClassStats> parts,
                     const FixedPointCodec& codec, std::uint64_t seed) {
  if (parts.empty()) throw ContractError("secure sum: nothing to sum");
  paillier::Randomness rng(seed);
  AggregationServer server(keys.public_key);
  for (const ClassStats& p : parts)
    server.Accept(EncryptStats(keys.public_key, p, codec, rng));
  return KeyHolder(keys, codec).Decrypt(server.aggregate());
}

}  // namespace fediic
