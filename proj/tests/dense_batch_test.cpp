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

#include "alsx/dense_batch.hpp"

#include <numeric>

#include <gtest/gtest.h>

#include "alsx/error.hpp"
#include "alsx/rng.hpp"
#include "test_util.hpp"

namespace alsx {
namespace {

// Row a = [1,2,3], row b = [4], over 5 columns.
SparseMatrix example() { return SparseMatrix::from_triplets(2, 5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}}); }

TEST(Densify, Example) {
  const auto m = example();
  const std::vector<std::uint32_t> rows = {0, 1};
  const auto b = densify(m, rows, 2);
  const std::uint32_t pad = 5;
  EXPECT_EQ(b.pad_id, pad);
  EXPECT_EQ(b.ids, (std::vector<std::uint32_t>{1, 2, 3, pad, 4, pad}));
  EXPECT_EQ(b.mask, (std::vector<std::uint8_t>{1, 1, 1, 0, 1, 0}));
  EXPECT_EQ(b.vals, (std::vector<float>{1, 1, 1, 0, 1, 0}));
  EXPECT_EQ(b.row_map, (std::vector<std::uint32_t>{0, 0, 1}));
  EXPECT_EQ(b.source_rows, rows);
}

TEST(Undensify, Example) {
  const auto m = example();
  const std::vector<std::uint32_t> rows = {0, 1};
  const auto out = undensify(densify(m, rows, 2));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (SparseRow{0, {{1, 1.0f}, {2, 1.0f}, {3, 1.0f}}}));
  EXPECT_EQ(out[1], (SparseRow{1, {{4, 1.0f}}}));
}

TEST(Undensify, EmptyBatch) {
  const auto b = densify(example(), {}, 4);
  EXPECT_EQ(b.num_dense_rows(), 0u);
  EXPECT_TRUE(undensify(b).empty());
}

TEST(Densify, EmptyRowHasNoDenseRows) {
  const auto m = SparseMatrix::from_triplets(3, 3, {{0, 1}, {2, 2}});
  const std::vector<std::uint32_t> rows = {0, 1, 2};
  const auto b = densify(m, rows, 2);
  EXPECT_EQ(b.num_dense_rows(), 2u);
  const auto out = undensify(b);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[1].entries.empty());
}

TEST(Densify, Errors) {
  const auto m = example();
  const std::vector<std::uint32_t> dup = {0, 0};
  const std::vector<std::uint32_t> oob = {2};
  EXPECT_THROW(densify(m, dup, 2), CodecError);
  EXPECT_THROW(densify(m, oob, 2), CodecError);
  EXPECT_THROW(densify(m, {}, 0), ConfigError);
}

TEST(Undensify, DetectsCorruption) {
  const std::vector<std::uint32_t> rows = {0, 1};
  auto b = densify(example(), rows, 2);
  auto bad = b;
  bad.mask[0] = 0;  // masked slot with a real id
  EXPECT_THROW(undensify(bad), CodecError);
  bad = b;
  bad.ids[3] = 0;  // padded slot with a real id
  EXPECT_THROW(undensify(bad), CodecError);
  bad = b;
  bad.row_map = {1, 0, 0};
  EXPECT_THROW(undensify(bad), CodecError);
  bad = b;
  bad.ids.pop_back();
  EXPECT_THROW(undensify(bad), CodecError);
}

TEST(PadDenseRows, AppendsMaskedRows) {
  const std::vector<std::uint32_t> rows = {0, 1};
  auto b = densify(example(), rows, 2);
  pad_dense_rows(b, 5);
  EXPECT_EQ(b.num_dense_rows(), 5u);
  EXPECT_EQ(b.row_map[4], kPaddingRow);
  EXPECT_EQ(undensify(b).size(), 2u);
  EXPECT_THROW(pad_dense_rows(b, 4), CodecError);
}

TEST(Densify, RandomRoundTrip) {
  CounterRng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = testing::random_sparse(20, 40, rng.uniform() * 0.5, rng.next_u64());
    std::vector<std::uint32_t> rows(20);
    std::iota(rows.begin(), rows.end(), 0u);
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
    rows.resize(rng.below(21));
    const auto L = static_cast<std::uint32_t>(1 + rng.below(32));
    auto b = densify(m, rows, L);
    pad_dense_rows(b, b.num_dense_rows() + rng.below(3));
    const auto out = undensify(b);
    ASSERT_EQ(out.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ASSERT_EQ(out[i].row, rows[i]);
      const auto cols = m.row_cols(rows[i]);
      const auto vals = m.row_values(rows[i]);
      ASSERT_EQ(out[i].entries.size(), cols.size());
      for (std::size_t k = 0; k < cols.size(); ++k) {
        ASSERT_EQ(out[i].entries[k].first, cols[k]);
        ASSERT_EQ(out[i].entries[k].second, vals[k]);
      }
    }
  }
}

TEST(WastedSlots, Formula) {
  const auto m = testing::random_sparse(30, 50, 0.2, 4);
  std::vector<std::uint32_t> rows(30);
  std::iota(rows.begin(), rows.end(), 0u);
  EXPECT_EQ(wasted_slots(m, rows, 1), 0u);
  for (std::uint32_t L : {2u, 5u, 8u, 16u}) {
    std::uint64_t expect = 0;
    for (auto r : rows) expect += L * dense_rows_for(m.row_len(r), L) - m.row_len(r);
    EXPECT_EQ(wasted_slots(m, rows, L), expect);
    const auto b = densify(m, rows, L);
    std::uint64_t masked = 0;
    for (auto v : b.mask) masked += v == 0;
    EXPECT_EQ(masked, expect);
  }
}

}  // namespace
}  // namespace alsx
