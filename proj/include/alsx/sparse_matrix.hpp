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

#ifndef ALSX_SPARSE_MATRIX_HPP_
#define ALSX_SPARSE_MATRIX_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace alsx {

struct Triplet {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  float value = 1.0f;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Compressed sparse rows. Column ids within a row are strictly increasing.
// Immutable once built; every constructor validates.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::uint64_t num_rows, std::uint64_t num_cols, std::vector<std::uint64_t> row_ptr,
               std::vector<std::uint32_t> col_idx, std::vector<float> values);

  // Sorts by (row, col); for duplicated (row, col) the entry appearing last
  // in `entries` wins.
  static SparseMatrix from_triplets(std::uint64_t num_rows, std::uint64_t num_cols,
                                    std::vector<Triplet> entries);

  std::uint64_t num_rows() const { return num_rows_; }
  std::uint64_t num_cols() const { return num_cols_; }
  std::uint64_t nnz() const { return col_idx_.size(); }

  std::span<const std::uint64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const float> values() const { return values_; }

  std::uint64_t row_len(std::uint64_t row) const { return row_ptr_[row + 1] - row_ptr_[row]; }
  std::span<const std::uint32_t> row_cols(std::uint64_t row) const {
    return std::span(col_idx_).subspan(row_ptr_[row], row_len(row));
  }
  std::span<const float> row_values(std::uint64_t row) const {
    return std::span(values_).subspan(row_ptr_[row], row_len(row));
  }

  std::vector<Triplet> triplets() const;

  // Throws DataError describing the first violated CSR invariant.
  void validate() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::uint64_t num_rows_ = 0;
  std::uint64_t num_cols_ = 0;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<float> values_;
};

SparseMatrix transpose(const SparseMatrix& m);

// Number of entries per column.
std::vector<std::uint64_t> column_degrees(const SparseMatrix& m);

// Tab-separated "src<TAB>dst[<TAB>value]" lines. An optional "#dims m n"
// header fixes the shape; other lines starting with '#' are comments.
SparseMatrix load_edge_list(const std::filesystem::path& path, float default_value = 1.0f);
void save_edge_list(const std::filesystem::path& path, const SparseMatrix& m);

// Binary CSR: "ALSC" | u64 rows | u64 cols | u64 nnz | u64 row_ptr[rows+1] |
// u32 col_idx[nnz] | f32 values[nnz], little-endian.
void save_binary_csr(const std::filesystem::path& path, const SparseMatrix& m);
SparseMatrix load_binary_csr(const std::filesystem::path& path);

// Sniffs the "ALSC" magic and dispatches to the binary or TSV loader.
SparseMatrix load_matrix(const std::filesystem::path& path, float default_value = 1.0f);

}  // namespace alsx

#endif  // ALSX_SPARSE_MATRIX_HPP_
