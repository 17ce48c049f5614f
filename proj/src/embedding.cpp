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

#include "alsx/embedding.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "alsx/bf16.hpp"
#include "alsx/error.hpp"
#include "alsx/rng.hpp"

namespace alsx {

ShardLayout::ShardLayout(std::uint64_t num_rows, std::uint32_t num_shards)
    : num_rows_(num_rows), num_shards_(num_shards) {
  if (num_shards == 0) throw ConfigError("shard count must be >= 1");
  base_ = num_rows / num_shards;
  extra_ = num_rows % num_shards;
}

RowRange ShardLayout::range(std::uint32_t shard) const {
  const std::uint64_t s = shard;
  const std::uint64_t begin = s * base_ + std::min(s, extra_);
  const std::uint64_t len = base_ + (s < extra_ ? 1 : 0);
  return {begin, begin + len};
}

std::uint32_t ShardLayout::owner(std::uint64_t row) const {
  const std::uint64_t wide = extra_ * (base_ + 1);
  if (row < wide) return static_cast<std::uint32_t>(row / (base_ + 1));
  return static_cast<std::uint32_t>(extra_ + (row - wide) / base_);
}

float initial_value(std::uint64_t seed, Side side, std::uint64_t row, std::uint32_t col,
                    std::uint32_t dim) {
  const std::uint64_t key = hash_combine(hash_combine(seed, static_cast<std::uint64_t>(side) + 1), row);
  const double u1 = to_unit_open(hash_combine(key, 2ull * col));
  const double u2 = to_unit_open(hash_combine(key, 2ull * col + 1));
  const double normal = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return static_cast<float>(normal / std::sqrt(static_cast<double>(dim)));
}

ShardedTable init_embeddings(std::uint64_t num_rows, const HyperParams& hp, Side side) {
  hp.validate();
  if (num_rows < hp.num_shards) {
    throw ConfigError(fmt::format("{} table has {} rows, fewer than the {} shards", to_string(side),
                                  num_rows, hp.num_shards));
  }
  const ShardLayout layout(num_rows, hp.num_shards);
  ShardedTable shards(hp.num_shards);
  for (std::uint32_t s = 0; s < hp.num_shards; ++s) {
    auto& shard = shards[s];
    shard.shard_id = s;
    shard.rows = layout.range(s);
    shard.side = side;
    shard.data.resize(static_cast<Eigen::Index>(shard.rows.size()), hp.dim);
    for (std::uint64_t r = 0; r < shard.rows.size(); ++r) {
      for (std::uint32_t c = 0; c < hp.dim; ++c) {
        float v = initial_value(hp.seed, side, shard.rows.begin + r, c, hp.dim);
        shard.data(static_cast<Eigen::Index>(r), c) = hp.bf16_tables() ? round_to_bf16(v) : v;
      }
    }
  }
  return shards;
}

ShardedTable shard_table(const RowMatrixF& global, std::uint32_t num_shards, Side side) {
  const auto num_rows = static_cast<std::uint64_t>(global.rows());
  if (num_rows < num_shards) {
    throw ConfigError(fmt::format("cannot shard {} rows over {} shards", num_rows, num_shards));
  }
  const ShardLayout layout(num_rows, num_shards);
  ShardedTable shards(num_shards);
  for (std::uint32_t s = 0; s < num_shards; ++s) {
    shards[s].shard_id = s;
    shards[s].rows = layout.range(s);
    shards[s].side = side;
    shards[s].data = global.middleRows(static_cast<Eigen::Index>(shards[s].rows.begin),
                                       static_cast<Eigen::Index>(shards[s].rows.size()));
  }
  return shards;
}

RowMatrixF concat_shards(const ShardedTable& shards) {
  if (shards.empty()) return {};
  const auto layout = layout_of(shards);
  RowMatrixF out(static_cast<Eigen::Index>(layout.num_rows()), shards.front().data.cols());
  for (const auto& s : shards) {
    out.middleRows(static_cast<Eigen::Index>(s.rows.begin), static_cast<Eigen::Index>(s.rows.size())) =
        s.data;
  }
  return out;
}

ShardLayout layout_of(const ShardedTable& shards) {
  if (shards.empty()) throw DataError("empty shard list");
  return ShardLayout(shards.back().rows.end, static_cast<std::uint32_t>(shards.size()));
}

void validate_shards(const ShardedTable& shards) {
  const auto layout = layout_of(shards);
  const auto dim = shards.front().data.cols();
  for (std::uint32_t s = 0; s < shards.size(); ++s) {
    const auto& shard = shards[s];
    if (shard.shard_id != s) throw DataError(fmt::format("shard {} has id {}", s, shard.shard_id));
    if (shard.rows != layout.range(s)) {
      throw DataError(fmt::format("shard {} covers [{},{}), expected [{},{})", s, shard.rows.begin,
                                  shard.rows.end, layout.range(s).begin, layout.range(s).end));
    }
    if (static_cast<std::uint64_t>(shard.data.rows()) != shard.rows.size() || shard.data.cols() != dim) {
      throw DataError(fmt::format("shard {} data shape mismatch", s));
    }
  }
}

bool all_bf16_representable(const ShardedTable& shards) {
  for (const auto& s : shards) {
    const float* p = s.data.data();
    for (Eigen::Index i = 0; i < s.data.size(); ++i) {
      if (!is_bf16_representable(p[i])) return false;
    }
  }
  return true;
}

}  // namespace alsx
