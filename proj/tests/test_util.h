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

#ifndef FEDIIC_TESTS_TEST_UTIL_H_
#define FEDIIC_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fediic/random.h"
#include "fediic/tensor.h"

namespace fediic::testing {

inline Tensor RandomMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                           double scale = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Tensor t({rows, cols});
  for (double& v : t.values()) v = normal(rng);
  return t;
}

inline Tensor UnitRows(Tensor t) {
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double s = 0.0;
    for (double v : t.row(i)) s += v * v;
    s = std::sqrt(s);
    for (double& v : t.row(i)) v /= s;
  }
  return t;
}

inline std::vector<int> RandomLabels(std::size_t n, int num_classes, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  std::vector<int> labels(n);
  for (int& y : labels) y = pick(rng);
  return labels;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("fediic_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fediic::testing

#endif  // FEDIIC_TESTS_TEST_UTIL_H_
