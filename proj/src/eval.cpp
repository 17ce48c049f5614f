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

#include "alsx/eval.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "alsx/dense_batch.hpp"
#include "alsx/error.hpp"

namespace alsx {

namespace {

std::vector<std::uint32_t> sorted_ks(std::span<const std::uint32_t> ks) {
  if (ks.empty()) throw ConfigError("at least one K is required");
  std::vector<std::uint32_t> out(ks.begin(), ks.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.front() == 0) throw ConfigError("K must be >= 1");
  return out;
}

}  // namespace

Eigen::VectorXf fold_in(std::span<const std::uint32_t> items, std::span<const float> values,
                        const RowMatrixF& item_table, const Gramian& gramian, const HyperParams& hp) {
  if (items.size() != values.size()) throw ConfigError("fold_in: items and values differ in length");
  const auto d = static_cast<std::size_t>(item_table.cols());
  if (items.empty()) return Eigen::VectorXf::Zero(static_cast<Eigen::Index>(d));

  std::vector<Triplet> entries;
  entries.reserve(items.size());
  for (std::size_t k = 0; k < items.size(); ++k) entries.push_back({0, items[k], values[k]});
  const auto row = SparseMatrix::from_triplets(1, static_cast<std::uint64_t>(item_table.rows()), std::move(entries));
  const std::uint32_t only_row = 0;
  const DenseBatch batch = densify(row, std::span(&only_row, 1), hp.dense_row_len);

  std::vector<float> emb(batch.num_slots() * d, 0.0f);
  for (std::size_t i = 0; i < batch.num_slots(); ++i) {
    if (batch.mask[i] == 0) continue;
    const auto h = item_table.row(batch.ids[i]);
    std::copy(h.data(), h.data() + d, emb.data() + i * d);
  }
  auto eqs = accumulate_stats(batch, emb, gramian, hp);
  return solve(eqs.front(), hp.solver, hp);
}

std::vector<std::uint32_t> top_k(const Eigen::VectorXf& w, const RowMatrixF& item_table, std::size_t k,
                                 std::span<const std::uint32_t> exclude) {
  if (k < 1) throw ConfigError("top_k: k must be >= 1");
  const Eigen::VectorXf scores = item_table * w;
  std::vector<std::uint32_t> candidates;
  candidates.reserve(static_cast<std::size_t>(item_table.rows()));
  std::size_t e = 0;
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(item_table.rows()); ++i) {
    while (e < exclude.size() && exclude[e] < i) ++e;
    if (e < exclude.size() && exclude[e] == i) continue;
    candidates.push_back(i);
  }
  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  candidates.resize(n);
  return candidates;
}

double recall_at_k(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  if (truth.empty()) throw DataError("recall_at_k: empty ground truth");
  std::vector<std::uint32_t> t(truth.begin(), truth.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::size_t hits = 0;
  for (auto p : pred) hits += std::binary_search(t.begin(), t.end(), p) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [k, v] : recall) r[std::to_string(k)] = v;
  return {{"recall", std::move(r)}, {"num_test_rows", num_test_rows}};
}

namespace {

template <typename Ranker>
EvalReport evaluate_with(const EvalSplit& split, std::span<const std::uint32_t> ks_in, Ranker&& rank,
                         std::vector<RowEval>* per_row, unsigned threads) {
  const auto ks = sorted_ks(ks_in);
  std::vector<std::uint32_t> rows;
  for (auto r : split.test_rows) {
    if (split.test_truth.row_len(r) > 0) rows.push_back(r);
  }
  std::vector<RowEval> results(rows.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rows[i];
      auto& out = results[i];
      out.row = r;
      out.top = rank(r, ks.back());
      const auto truth = split.test_truth.row_cols(r);
      for (auto k : ks) {
        const auto n = std::min<std::size_t>(k, out.top.size());
        out.recall.push_back(recall_at_k(std::span(out.top).first(n), truth));
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(rows.size(), 1)));
  if (threads <= 1) {
    work(0, rows.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (rows.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(rows.size(), t * chunk);
      const std::size_t e = std::min(rows.size(), b + chunk);
      pool.emplace_back(work, b, e);
    }
  }

  EvalReport report;
  report.ks = ks;
  report.num_test_rows = rows.size();
  for (std::size_t j = 0; j < ks.size(); ++j) {
    double sum = 0.0;
    for (const auto& r : results) sum += r.recall[j];
    report.recall[ks[j]] = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }
  if (per_row != nullptr) *per_row = std::move(results);
  return report;
}

}  // namespace

EvalReport evaluate(const EvalSplit& split, const RowMatrixF& item_table, const HyperParams& hp,
                    std::span<const std::uint32_t> ks, std::vector<RowEval>* per_row, unsigned threads) {
  if (static_cast<std::uint64_t>(item_table.rows()) != split.test_inputs.num_cols()) {
    throw ConfigError(fmt::format("item table has {} rows, split has {} columns", item_table.rows(),
                                  split.test_inputs.num_cols()));
  }
  const Gramian gramian = local_gramian(item_table);
  auto rank = [&](std::uint32_t r, std::size_t k) {
    const auto inputs = split.test_inputs.row_cols(r);
    const Eigen::VectorXf w = fold_in(inputs, split.test_inputs.row_values(r), item_table, gramian, hp);
    return top_k(w, item_table, k, inputs);
  };
  return evaluate_with(split, ks, rank, per_row, threads);
}

EvalReport evaluate_popularity(const EvalSplit& split, std::span<const std::uint32_t> ks) {
  const auto degree = column_degrees(split.train);
  std::vector<std::uint32_t> order(degree.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return degree[a] > degree[b]; });
  auto rank = [&](std::uint32_t r, std::size_t k) {
    const auto inputs = split.test_inputs.row_cols(r);
    std::vector<std::uint32_t> out;
    for (auto item : order) {
      if (out.size() == k) break;
      if (!std::binary_search(inputs.begin(), inputs.end(), item)) out.push_back(item);
    }
    return out;
  };
  return evaluate_with(split, ks, rank, nullptr, 1);
}

void write_row_dump(std::ostream& out, std::span<const std::uint32_t> ks, std::span<const RowEval> rows) {
  out << "row";
  for (auto k : ks) out << "\trecall@" << k;
  out << "\ttop\n";
  for (const auto& r : rows) {
    out << r.row;
    for (double v : r.recall) out << '\t' << fmt::format("{:.6g}", v);
    out << '\t' << fmt::format("{}", fmt::join(r.top, ",")) << '\n';
  }
}

}  // namespace alsx
