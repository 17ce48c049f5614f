// Copyright 2026 The ALSX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ALSX_TESTS_TEST_UTIL_HPP_
#define ALSX_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "alsx/rng.hpp"
#include "alsx/sparse_matrix.hpp"

namespace alsx::testing {

// Fresh per-test scratch directory.
inline std::filesystem::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() /
             (std::string("alsx_") + info->test_suite_name() + "_" + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

// Each entry present with probability `density`, value in [0.5, 1.5).
inline SparseMatrix random_sparse(std::uint64_t rows, std::uint64_t cols, double density, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Triplet> t;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (rng.uniform() < density) t.push_back({r, c, static_cast<float>(0.5 + rng.uniform())});
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

}  // namespace alsx::testing

#endif  // ALSX_TESTS_TEST_UTIL_HPP_
