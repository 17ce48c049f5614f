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

#ifndef ALSX_EMBEDDING_HPP_
#define ALSX_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "alsx/hyperparams.hpp"

namespace alsx {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RowRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;  // exclusive

  std::uint64_t size() const { return end - begin; }
  bool contains(std::uint64_t row) const { return row >= begin && row < end; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

// Uniform contiguous partition of [0, num_rows) over num_shards workers. The
// first num_rows % num_shards shards hold one extra row.
class ShardLayout {
 public:
  ShardLayout() = default;
  ShardLayout(std::uint64_t num_rows, std::uint32_t num_shards);

  std::uint64_t num_rows() const { return num_rows_; }
  std::uint32_t num_shards() const { return num_shards_; }

  RowRange range(std::uint32_t shard) const;
  std::uint32_t owner(std::uint64_t row) const;
  std::uint64_t local_index(std::uint64_t row) const { return row - range(owner(row)).begin; }
  std::uint64_t global_index(std::uint32_t shard, std::uint64_t local) const {
    return range(shard).begin + local;
  }

 private:
  std::uint64_t num_rows_ = 0;
  std::uint32_t num_shards_ = 1;
  std::uint64_t base_ = 0;
  std::uint64_t extra_ = 0;
};

// One worker's slice of an embedding table.
struct EmbeddingShard {
  std::uint32_t shard_id = 0;
  RowRange rows;
  Side side = Side::kUsers;
  RowMatrixF data;  // rows.size() x dim

  std::uint32_t dim() const { return static_cast<std::uint32_t>(data.cols()); }
};

using ShardedTable = std::vector<EmbeddingShard>;

// Deterministic N(0, 1/d) entries keyed on (seed, side, row, column), so the
// global table does not depend on the shard count. Rounded to bf16 when the
// precision policy stores tables in bf16.
ShardedTable init_embeddings(std::uint64_t num_rows, const HyperParams& hp, Side side);

// Value of entry (row, col) of the initial table, exposed for tests.
float initial_value(std::uint64_t seed, Side side, std::uint64_t row, std::uint32_t col,
                    std::uint32_t dim);

ShardedTable shard_table(const RowMatrixF& global, std::uint32_t num_shards, Side side);
RowMatrixF concat_shards(const ShardedTable& shards);

ShardLayout layout_of(const ShardedTable& shards);

// Checks the partition invariant (contiguous, disjoint, balanced, consistent
// dims); throws DataError.
void validate_shards(const ShardedTable& shards);

bool all_bf16_representable(const ShardedTable& shards);

}  // namespace alsx

#endif  // ALSX_EMBEDDING_HPP_
