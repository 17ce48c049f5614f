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

#ifndef ALSX_DATASETS_HPP_
#define ALSX_DATASETS_HPP_

#include <cstdint>
#include <vector>

#include "alsx/sparse_matrix.hpp"

namespace alsx {

// Strong-generalization split. All three matrices keep the original shape and
// global row ids; a test row is empty in `train`, and its entries are divided
// between `test_inputs` and `test_truth`.
struct EvalSplit {
  SparseMatrix train;
  SparseMatrix test_inputs;
  SparseMatrix test_truth;
  std::vector<std::uint32_t> test_rows;  // ascending
};

struct SplitOptions {
  double row_frac = 0.9;       // fraction of rows kept for training
  double holdout_frac = 0.25;  // fraction of a test row's entries held out as truth
  std::uint64_t seed = 0;
};

// Rows are ranked by a seeded hash of their id; the round((1 - row_frac) *
// num_rows) highest-ranked rows with at least two entries become test rows.
// Each test row holds out ceil(holdout_frac * len) entries (at least one, at
// most len - 1) chosen by a seeded shuffle.
EvalSplit split_strong_generalization(const SparseMatrix& m, const SplitOptions& options);

// Samples Gaussian user and item factors of rank `true_rank` and keeps, for
// each row, the `per_row_nnz` columns with the largest inner product (value 1).
SparseMatrix synth_low_rank(std::uint64_t num_rows, std::uint64_t num_cols, std::uint32_t true_rank,
                            std::uint32_t per_row_nnz, std::uint64_t seed);

}  // namespace alsx

#endif  // ALSX_DATASETS_HPP_
