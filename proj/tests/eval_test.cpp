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
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "alsx/error.hpp"
#include "alsx/rng.hpp"
#include "alsx/trainer.hpp"
#include "test_util.hpp"

namespace alsx {
namespace {

HyperParams eval_params(std::uint32_t d) {
  HyperParams hp;
  hp.dim = d;
  hp.precision = Precision::kF32;
  hp.solver = Solver::kCholesky;
  hp.alpha = 0.1;
  hp.lambda = 0.01;
  return hp;
}

RowMatrixF random_table(std::uint64_t rows, std::uint32_t d, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrixF t(rows, d);
  for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = static_cast<float>(rng.normal());
  return t;
}

TEST(FoldIn, EmptyInputsGiveZero) {
  const auto h = random_table(5, 3, 1);
  const auto w = fold_in({}, {}, h, local_gramian(h), eval_params(3));
  EXPECT_TRUE(w.isZero());
  EXPECT_EQ(w.size(), 3);
}

TEST(FoldIn, SingleInput) {
  RowMatrixF h(2, 2);
  h << 1, 0, 0, 1;
  const std::vector<std::uint32_t> items = {0};
  const std::vector<float> vals = {1.0f};
  const auto w = fold_in(items, vals, h, Gramian{Eigen::MatrixXf::Identity(2, 2)}, eval_params(2));
  EXPECT_NEAR(w[0], 1.0 / 1.11, 1e-6);
  EXPECT_NEAR(w[1], 0.0, 1e-7);
}

TEST(FoldIn, IndependentOfDenseRowLength) {
  const auto h = random_table(40, 6, 2);
  const auto g = local_gramian(h);
  std::vector<std::uint32_t> items = {1, 4, 9, 10, 22, 23, 30, 31, 39};
  std::vector<float> vals(items.size(), 1.0f);
  auto hp = eval_params(6);
  hp.dense_row_len = 32;
  const auto ref = fold_in(items, vals, h, g, hp);
  for (std::uint32_t L : {1u, 2u, 4u, 8u}) {
    hp.dense_row_len = L;
    EXPECT_LE((fold_in(items, vals, h, g, hp) - ref).cwiseAbs().maxCoeff(), 1e-5f);
  }
}

TEST(TopK, Identity) {
  const RowMatrixF h = RowMatrixF::Identity(3, 3);
  EXPECT_EQ(top_k(Eigen::Vector3f(0, 1, 0), h, 1), (std::vector<std::uint32_t>{1}));
}

TEST(TopK, TiesToSmallerId) {
  const RowMatrixF h = RowMatrixF::Ones(5, 2);
  EXPECT_EQ(top_k(Eigen::Vector2f(1, 1), h, 2), (std::vector<std::uint32_t>{0, 1}));
  const std::vector<std::uint32_t> exclude = {0, 3};
  EXPECT_EQ(top_k(Eigen::Vector2f(1, 1), h, 2, exclude), (std::vector<std::uint32_t>{1, 2}));
}

TEST(TopK, ShortWhenFewCandidates) {
  const RowMatrixF h = RowMatrixF::Ones(3, 2);
  const std::vector<std::uint32_t> exclude = {1};
  EXPECT_EQ(top_k(Eigen::Vector2f(1, 0), h, 10, exclude).size(), 2u);
  EXPECT_THROW(top_k(Eigen::Vector2f(1, 0), h, 0), ConfigError);
}

TEST(TopK, MatchesFullSortOracle) {
  const auto h = random_table(500, 8, 3);
  CounterRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXf w(8);
    for (int j = 0; j < 8; ++j) w[j] = static_cast<float>(rng.normal());
    std::vector<std::uint32_t> exclude;
    for (std::uint32_t i = 0; i < 500; ++i) {
      if (rng.uniform() < 0.05) exclude.push_back(i);
    }
    const Eigen::VectorXf s = h * w;
    std::vector<std::uint32_t> order;
    for (std::uint32_t i = 0; i < 500; ++i) {
      if (!std::binary_search(exclude.begin(), exclude.end(), i)) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] != s[b] ? s[a] > s[b] : a < b; });
    order.resize(20);
    EXPECT_EQ(top_k(w, h, 20, exclude), order);
  }
}

TEST(TopK, StableUnderStoragePermutation) {
  // Permuting the rows of H and mapping ids back gives the same ranking.
  const auto h = random_table(50, 4, 9);
  std::vector<std::uint32_t> perm(50);
  std::iota(perm.begin(), perm.end(), 0u);
  std::reverse(perm.begin(), perm.end());
  RowMatrixF hp(50, 4);
  for (std::uint32_t i = 0; i < 50; ++i) hp.row(perm[i]) = h.row(i);
  const Eigen::Vector4f w(1, -1, 0.5, 0.25);
  const auto a = top_k(w, h, 10);
  auto b = top_k(w, hp, 10);
  for (auto& id : b) id = perm[id];  // reversal is its own inverse
  EXPECT_EQ(a, b);
}

TEST(Recall, Examples) {
  const std::vector<std::uint32_t> pred = {1, 2, 3};
  const std::vector<std::uint32_t> truth = {2, 9};
  EXPECT_DOUBLE_EQ(recall_at_k(pred, truth), 0.5);
  const std::vector<std::uint32_t> sub = {3, 1};
  EXPECT_DOUBLE_EQ(recall_at_k(pred, sub), 1.0);
  EXPECT_THROW(recall_at_k(pred, {}), DataError);
}

TEST(Recall, MatchesSetOracle) {
  CounterRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint32_t> pred, truth;
    std::set<std::uint32_t> ps;
    while (pred.size() < 20) {
      const auto x = static_cast<std::uint32_t>(rng.below(60));
      if (ps.insert(x).second) pred.push_back(x);
    }
    std::set<std::uint32_t> ts;
    const auto n = 1 + rng.below(15);
    while (ts.size() < n) ts.insert(static_cast<std::uint32_t>(rng.below(60)));
    truth.assign(ts.begin(), ts.end());
    std::size_t hits = 0;
    for (auto t : ts) hits += ps.count(t);
    EXPECT_DOUBLE_EQ(recall_at_k(pred, truth), static_cast<double>(hits) / static_cast<double>(ts.size()));
  }
}

// Two item clusters along orthogonal directions; each test row's inputs and
// truth come from the same cluster.
EvalSplit cluster_split(RowMatrixF& items) {
  items = RowMatrixF::Zero(8, 2);
  for (int i = 0; i < 4; ++i) items(i, 0) = 1.0f;
  for (int i = 4; i < 8; ++i) items(i, 1) = 1.0f;
  EvalSplit s;
  s.train = SparseMatrix::from_triplets(3, 8, {{0, 0}, {0, 5}});
  s.test_inputs = SparseMatrix::from_triplets(3, 8, {{1, 0}, {1, 1}, {2, 6}});
  s.test_truth = SparseMatrix::from_triplets(3, 8, {{1, 2}, {1, 3}, {2, 4}, {2, 5}, {2, 7}});
  s.test_rows = {1, 2};
  return s;
}

TEST(Evaluate, PerfectModelHasFullRecall) {
  RowMatrixF items;
  const auto split = cluster_split(items);
  const std::vector<std::uint32_t> ks = {2, 3};
  std::vector<RowEval> rows;
  const auto report = evaluate(split, items, eval_params(2), ks, &rows);
  EXPECT_EQ(report.num_test_rows, 2u);
  EXPECT_DOUBLE_EQ(report.recall.at(3), 1.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].top, (std::vector<std::uint32_t>{2, 3, 4}));
  EXPECT_DOUBLE_EQ(rows[0].recall[0], 1.0);
  EXPECT_DOUBLE_EQ(rows[1].recall[0], 2.0 / 3.0);
}

TEST(Evaluate, DeterministicMonotoneAndThreadIndependent) {
  const auto m = synth_low_rank(300, 200, 4, 15, 8);
  const auto split = split_strong_generalization(m, {0.8, 0.25, 1});
  HyperParams hp = eval_params(8);
  hp.epochs = 3;
  hp.num_shards = 2;
  hp.alpha = 1e-3;
  hp.lambda = 0.05;
  const auto items = concat_shards(train(split.train, hp).items);
  std::vector<RowEval> a_rows, b_rows;
  const auto a = evaluate(split, items, hp, kDefaultRecallKs, &a_rows, 1);
  const auto b = evaluate(split, items, hp, kDefaultRecallKs, &b_rows, 4);
  EXPECT_EQ(a.recall, b.recall);
  ASSERT_EQ(a_rows.size(), b_rows.size());
  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    EXPECT_EQ(a_rows[i].top, b_rows[i].top);
    EXPECT_GE(a_rows[i].recall[1], a_rows[i].recall[0]);
  }
  // Trained model beats the popularity ranking on low-rank data.
  EXPECT_GT(a.recall.at(20), evaluate_popularity(split).recall.at(20));
}

TEST(Evaluate, ShapeMismatch) {
  RowMatrixF items;
  const auto split = cluster_split(items);
  EXPECT_THROW(evaluate(split, RowMatrixF::Zero(7, 2), eval_params(2)), ConfigError);
}

TEST(Popularity, RanksByTrainDegree) {
  EvalSplit s;
  s.train = SparseMatrix::from_triplets(4, 4, {{0, 3}, {1, 3}, {2, 3}, {0, 1}, {1, 1}, {2, 2}});
  s.test_inputs = SparseMatrix::from_triplets(4, 4, {{3, 3}});
  s.test_truth = SparseMatrix::from_triplets(4, 4, {{3, 1}, {3, 0}});
  s.test_rows = {3};
  const std::vector<std::uint32_t> ks = {1, 3};
  const auto r = evaluate_popularity(s, ks);
  // Ranking without the input item 3: 1, 2, 0.
  EXPECT_DOUBLE_EQ(r.recall.at(1), 0.5);
  EXPECT_DOUBLE_EQ(r.recall.at(3), 1.0);
}

TEST(RowDump, Format) {
  const std::vector<std::uint32_t> ks = {1, 2};
  const std::vector<RowEval> rows = {{7, {0.5, 1.0}, {3, 4}}};
  std::ostringstream out;
  write_row_dump(out, ks, rows);
  EXPECT_EQ(out.str(), "row\trecall@1\trecall@2\ttop\n7\t0.5\t1\t3,4\n");
}

TEST(ReportJson, Shape) {
  EvalReport r;
  r.ks = {20};
  r.recall[20] = 0.25;
  r.num_test_rows = 3;
  const auto j = r.to_json();
  EXPECT_DOUBLE_EQ(j["recall"]["20"].get<double>(), 0.25);
  EXPECT_EQ(j["num_test_rows"], 3);
}

}  // namespace
}  // namespace alsx
