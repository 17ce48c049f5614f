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
#include <numeric>

#include <fmt/format.h>

#include "alsx/embedding.hpp"
#include "alsx/error.hpp"
#include "alsx/rng.hpp"

namespace alsx {

namespace {

constexpr std::uint64_t kRowRankSalt = 0x5EED0001;
constexpr std::uint64_t kHoldoutSalt = 0x5EED0002;
constexpr std::uint64_t kUserFactorSalt = 0x5EED0003;
constexpr std::uint64_t kItemFactorSalt = 0x5EED0004;

}  // namespace

EvalSplit split_strong_generalization(const SparseMatrix& m, const SplitOptions& options) {
  if (!(options.row_frac > 0.0 && options.row_frac < 1.0)) {
    throw ConfigError(fmt::format("row_frac must be in (0,1), got {}", options.row_frac));
  }
  if (!(options.holdout_frac > 0.0 && options.holdout_frac < 1.0)) {
    throw ConfigError(fmt::format("holdout_frac must be in (0,1), got {}", options.holdout_frac));
  }
  const std::uint64_t rows = m.num_rows();
  const auto wanted_test =
      static_cast<std::uint64_t>(std::llround((1.0 - options.row_frac) * static_cast<double>(rows)));

  std::vector<std::pair<std::uint64_t, std::uint32_t>> ranked;
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (m.row_len(r) < 2) continue;
    ranked.emplace_back(hash_combine(hash_combine(options.seed, kRowRankSalt), r),
                        static_cast<std::uint32_t>(r));
  }
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  ranked.resize(std::min<std::uint64_t>(wanted_test, ranked.size()));

  EvalSplit split;
  split.test_rows.reserve(ranked.size());
  for (const auto& [hash, row] : ranked) split.test_rows.push_back(row);
  std::sort(split.test_rows.begin(), split.test_rows.end());

  std::vector<bool> is_test(rows, false);
  for (auto r : split.test_rows) is_test[r] = true;

  std::vector<Triplet> train, inputs, truth;
  train.reserve(m.nnz());
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto cols = m.row_cols(r);
    const auto vals = m.row_values(r);
    const auto row = static_cast<std::uint32_t>(r);
    if (!is_test[r]) {
      for (std::size_t k = 0; k < cols.size(); ++k) train.push_back({row, cols[k], vals[k]});
      continue;
    }
    const std::size_t len = cols.size();
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(hash_combine(hash_combine(options.seed, kHoldoutSalt), r));
    for (std::size_t i = len - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    // Guard the ceiling against representation error, e.g. 0.3 * 10.
    auto held = static_cast<std::size_t>(std::ceil(options.holdout_frac * static_cast<double>(len) - 1e-9));
    held = std::clamp<std::size_t>(held, 1, len - 1);
    for (std::size_t i = 0; i < len; ++i) {
      const auto k = order[i];
      (i < held ? truth : inputs).push_back({row, cols[k], vals[k]});
    }
  }
  split.train = SparseMatrix::from_triplets(rows, m.num_cols(), std::move(train));
  split.test_inputs = SparseMatrix::from_triplets(rows, m.num_cols(), std::move(inputs));
  split.test_truth = SparseMatrix::from_triplets(rows, m.num_cols(), std::move(truth));
  return split;
}

SparseMatrix synth_low_rank(std::uint64_t num_rows, std::uint64_t num_cols, std::uint32_t true_rank,
                            std::uint32_t per_row_nnz, std::uint64_t seed) {
  if (true_rank < 1 || true_rank > std::min(num_rows, num_cols)) {
    throw ConfigError(fmt::format("true_rank must be in [1, min(m,n)] = [1, {}], got {}",
                                  std::min(num_rows, num_cols), true_rank));
  }
  if (per_row_nnz > num_cols) {
    throw ConfigError(fmt::format("per_row_nnz {} exceeds the {} columns", per_row_nnz, num_cols));
  }
  const auto rank = static_cast<Eigen::Index>(true_rank);
  RowMatrixD users(static_cast<Eigen::Index>(num_rows), rank);
  RowMatrixD items(static_cast<Eigen::Index>(num_cols), rank);
  for (Eigen::Index r = 0; r < users.rows(); ++r) {
    CounterRng rng(hash_combine(hash_combine(seed, kUserFactorSalt), static_cast<std::uint64_t>(r)));
    for (Eigen::Index c = 0; c < rank; ++c) users(r, c) = rng.normal();
  }
  for (Eigen::Index r = 0; r < items.rows(); ++r) {
    CounterRng rng(hash_combine(hash_combine(seed, kItemFactorSalt), static_cast<std::uint64_t>(r)));
    for (Eigen::Index c = 0; c < rank; ++c) items(r, c) = rng.normal();
  }

  std::vector<Triplet> entries;
  entries.reserve(num_rows * per_row_nnz);
  std::vector<std::uint32_t> order(num_cols);
  Eigen::VectorXd scores(static_cast<Eigen::Index>(num_cols));
  for (std::uint64_t r = 0; r < num_rows; ++r) {
    scores.noalias() = items * users.row(static_cast<Eigen::Index>(r)).transpose();
    std::iota(order.begin(), order.end(), 0u);
    std::partial_sort(order.begin(), order.begin() + per_row_nnz, order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    for (std::uint32_t k = 0; k < per_row_nnz; ++k) {
      entries.push_back({static_cast<std::uint32_t>(r), order[k], 1.0f});
    }
  }
  return SparseMatrix::from_triplets(num_rows, num_cols, std::move(entries));
}

}  // namespace alsx
