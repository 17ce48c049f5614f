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

#ifndef ALSX_DENSE_BATCH_HPP_
#define ALSX_DENSE_BATCH_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "alsx/sparse_matrix.hpp"

namespace alsx {

// row_map value of the fully masked rows appended by pad_dense_rows().
inline constexpr std::uint32_t kPaddingRow = std::numeric_limits<std::uint32_t>::max();

// Fixed-shape (R x L) view of a set of sparse rows. A source row of length n
// occupies ceil(n / L) consecutive dense rows; only the last one can carry
// padding. Padded slots hold `pad_id` (the column count of the source matrix)
// with value 0 and mask 0.
struct DenseBatch {
  std::uint32_t row_len = 1;
  std::uint32_t pad_id = 0;
  std::vector<std::uint32_t> ids;
  std::vector<float> vals;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint32_t> row_map;      // dense row -> index into source_rows
  std::vector<std::uint32_t> source_rows;  // distinct, batch order

  std::size_t num_dense_rows() const { return row_map.size(); }
  std::size_t num_slots() const { return ids.size(); }
};

inline std::uint64_t dense_rows_for(std::uint64_t len, std::uint32_t row_len) {
  return (len + row_len - 1) / row_len;
}

DenseBatch densify(const SparseMatrix& m, std::span<const std::uint32_t> rows, std::uint32_t row_len);

// Appends fully masked dense rows until the batch has `dense_rows` rows.
// Throws CodecError if the batch is already larger.
void pad_dense_rows(DenseBatch& batch, std::size_t dense_rows);

struct SparseRow {
  std::uint32_t row = 0;
  std::vector<std::pair<std::uint32_t, float>> entries;
  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

// Inverse of densify (padding rows are dropped). Throws CodecError when the
// batch violates its layout invariants.
std::vector<SparseRow> undensify(const DenseBatch& batch);

// Masked slots over the given rows: sum of L * ceil(len / L) - len.
std::uint64_t wasted_slots(const SparseMatrix& m, std::span<const std::uint32_t> rows,
                           std::uint32_t row_len);

}  // namespace alsx

#endif  // ALSX_DENSE_BATCH_HPP_
