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

#include "alsx/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "alsx/error.hpp"
#include "test_util.hpp"

namespace alsx {
namespace {

using Entry = std::tuple<std::uint32_t, std::uint32_t, float>;

std::multiset<Entry> entries(const SparseMatrix& m) {
  std::multiset<Entry> out;
  for (const auto& t : m.triplets()) out.emplace(t.row, t.col, t.value);
  return out;
}

TEST(Split, PartitionProperty) {
  const auto m = testing::random_sparse(300, 80, 0.08, 21);
  const auto s = split_strong_generalization(m, {0.9, 0.25, 4});
  s.train.validate();
  s.test_inputs.validate();
  s.test_truth.validate();
  auto all = entries(s.train);
  for (const auto& e : entries(s.test_inputs)) all.insert(e);
  for (const auto& e : entries(s.test_truth)) all.insert(e);
  EXPECT_EQ(all, entries(m));

  EXPECT_TRUE(std::is_sorted(s.test_rows.begin(), s.test_rows.end()));
  for (auto r : s.test_rows) {
    EXPECT_EQ(s.train.row_len(r), 0u);
    EXPECT_GE(s.test_truth.row_len(r), 1u);
    EXPECT_GE(s.test_inputs.row_len(r), 1u);
    const auto len = m.row_len(r);
    EXPECT_EQ(s.test_truth.row_len(r), std::clamp<std::uint64_t>(
                                           static_cast<std::uint64_t>(std::ceil(0.25 * static_cast<double>(len))), 1,
                                           len - 1));
  }
  EXPECT_EQ(s.test_rows.size(), 30u);
}

TEST(Split, TenRows) {
  std::vector<Triplet> t;
  for (std::uint32_t r = 0; r < 10; ++r) {
    for (std::uint32_t c = 0; c < 4; ++c) t.push_back({r, c, 1.0f});
  }
  const auto m = SparseMatrix::from_triplets(10, 4, t);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = split_strong_generalization(m, {0.9, 0.25, seed});
    ASSERT_EQ(s.test_rows.size(), 1u);
    const auto r = s.test_rows[0];
    EXPECT_EQ(s.test_truth.row_len(r), 1u);
    EXPECT_EQ(s.test_inputs.row_len(r), 3u);
  }
}

TEST(Split, ShortRowsStayInTrain) {
  const auto m = SparseMatrix::from_triplets(20, 5, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const auto s = split_strong_generalization(m, {0.5, 0.25, 1});
  EXPECT_TRUE(s.test_rows.empty());
  EXPECT_EQ(s.train, m);
}

TEST(Split, Deterministic) {
  const auto m = testing::random_sparse(100, 50, 0.1, 3);
  const auto a = split_strong_generalization(m, {0.9, 0.25, 8});
  const auto b = split_strong_generalization(m, {0.9, 0.25, 8});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test_inputs, b.test_inputs);
  EXPECT_EQ(a.test_truth, b.test_truth);
  EXPECT_EQ(a.test_rows, b.test_rows);
  const auto c = split_strong_generalization(m, {0.9, 0.25, 9});
  EXPECT_NE(a.test_rows, c.test_rows);
}

TEST(Split, RejectsBadFractions) {
  const auto m = testing::random_sparse(10, 10, 0.5, 3);
  EXPECT_THROW(split_strong_generalization(m, {1.0, 0.25, 0}), ConfigError);
  EXPECT_THROW(split_strong_generalization(m, {0.9, 0.0, 0}), ConfigError);
}

TEST(Synth, FullRows) {
  const auto m = synth_low_rank(4, 4, 4, 4, 1);
  m.validate();
  for (std::uint64_t r = 0; r < 4; ++r) EXPECT_EQ(m.row_len(r), 4u);
}

TEST(Synth, DeterministicAndShaped) {
  const auto a = synth_low_rank(50, 60, 3, 7, 2);
  EXPECT_EQ(a, synth_low_rank(50, 60, 3, 7, 2));
  EXPECT_NE(a, synth_low_rank(50, 60, 3, 7, 3));
  EXPECT_EQ(a.nnz(), 350u);
  for (float v : a.values()) EXPECT_EQ(v, 1.0f);
}

TEST(Synth, Errors) {
  EXPECT_THROW(synth_low_rank(4, 4, 2, 5, 0), ConfigError);
  EXPECT_THROW(synth_low_rank(4, 4, 5, 2, 0), ConfigError);
}

}  // namespace
}  // namespace alsx
