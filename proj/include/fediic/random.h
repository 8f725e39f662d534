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

#ifndef FEDIIC_RANDOM_H_
#define FEDIIC_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fediic {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a tuple of keys,
// e.g. DeriveSeed(experiment_seed, {kTrainStream, client_id, round}).
constexpr std::uint64_t DeriveSeed(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = MixBits(base);
  for (std::uint64_t k : keys) h = MixBits(h ^ MixBits(k));
  return h;
}

}  // namespace fediic

#endif  // FEDIIC_RANDOM_H_
