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

#ifndef ALSX_EVAL_HPP_
#define ALSX_EVAL_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "alsx/datasets.hpp"
#include "alsx/embedding.hpp"
#include "alsx/hyperparams.hpp"
#include "alsx/solvers.hpp"

namespace alsx {

// Embedding of an unseen row from its observed (item, y) pairs with the item
// table held fixed: the same normal equations and solver as training, built
// through the same dense-batch path. No inputs gives the zero vector.
Eigen::VectorXf fold_in(std::span<const std::uint32_t> items, std::span<const float> values,
                        const RowMatrixF& item_table, const Gramian& gramian, const HyperParams& hp);

// The k items with the largest <w, h_i>, best first, ties to the smaller id.
// `exclude` must be sorted. Returns fewer than k ids if not enough remain.
std::vector<std::uint32_t> top_k(const Eigen::VectorXf& w, const RowMatrixF& item_table, std::size_t k,
                                 std::span<const std::uint32_t> exclude = {});

// |pred ∩ truth| / |truth|. `truth` must be non-empty (DataError otherwise).
double recall_at_k(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);

struct EvalReport {
  std::vector<std::uint32_t> ks;
  std::map<std::uint32_t, double> recall;  // K -> mean recall
  std::uint64_t num_test_rows = 0;

  // {"recall": {"20": r, ...}, "num_test_rows": n}
  nlohmann::json to_json() const;
};

struct RowEval {
  std::uint32_t row = 0;
  std::vector<double> recall;         // aligned with EvalReport::ks
  std::vector<std::uint32_t> top;     // max(K) ids
};

inline const std::vector<std::uint32_t> kDefaultRecallKs = {20, 50};

// For every test row: fold in its inputs, retrieve the top max(K) items not
// among the inputs, score recall against the held-out truth. Rows are spread
// over `threads` threads (0 = hardware concurrency) and merged in row order.
EvalReport evaluate(const EvalSplit& split, const RowMatrixF& item_table, const HyperParams& hp,
                    std::span<const std::uint32_t> ks = kDefaultRecallKs,
                    std::vector<RowEval>* per_row = nullptr, unsigned threads = 0);

// Same protocol with a fixed ranking of items by in-degree in split.train
// (ties to the smaller id) instead of a model.
EvalReport evaluate_popularity(const EvalSplit& split, std::span<const std::uint32_t> ks = kDefaultRecallKs);

// row<TAB>recall@K1<TAB>...<TAB>comma-separated top ids
void write_row_dump(std::ostream& out, std::span<const std::uint32_t> ks, std::span<const RowEval> rows);

}  // namespace alsx

#endif  // ALSX_EVAL_HPP_
