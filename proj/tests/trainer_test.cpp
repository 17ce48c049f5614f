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

#include "alsx/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "alsx/datasets.hpp"
#include "alsx/error.hpp"
#include "test_util.hpp"

namespace alsx {
namespace {

HyperParams small_params(std::uint32_t d, std::uint32_t shards = 1) {
  HyperParams hp;
  hp.dim = d;
  hp.num_shards = shards;
  hp.epochs = 2;
  hp.solver = Solver::kCholesky;
  hp.precision = Precision::kF32;
  hp.lambda = 0.05;
  hp.alpha = 1e-3;
  hp.batch_rows = 16;
  hp.seed = 3;
  return hp;
}

RowMatrixF random_table(std::uint64_t rows, std::uint32_t d, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrixF t(rows, d);
  for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = static_cast<float>(rng.normal());
  return t;
}

TEST(PlanBatches, RoundRobinAndPacking) {
  // Row lengths 3, 0, 5, 1, 2 with L = 2 need 2, 0, 3, 1, 1 dense rows.
  const auto m = SparseMatrix::from_triplets(
      5, 6, {{0, 0}, {0, 1}, {0, 2}, {2, 0}, {2, 1}, {2, 2}, {2, 3}, {2, 4}, {3, 5}, {4, 0}, {4, 1}});
  const auto plan = plan_batches(m, 2, 2, 3);
  EXPECT_EQ(plan.dense_rows, 3u);
  ASSERT_EQ(plan.rows.size(), 2u);
  // Worker 0 owns rows 0, 2, 4: [0] needs 2, [2] needs 3, [4] needs 1.
  EXPECT_EQ(plan.rows[0], (std::vector<std::vector<std::uint32_t>>{{0}, {2}, {4}}));
  // Worker 1 owns rows 1 (empty) and 3.
  EXPECT_EQ(plan.rows[1], (std::vector<std::vector<std::uint32_t>>{{3}}));
  EXPECT_EQ(plan.num_steps, 3u);
  EXPECT_EQ(plan.observed_slots, 11u);
  EXPECT_EQ(plan.total_batches(), 6u);
  EXPECT_EQ(plan.fixed_slots(), 6u * 3 * 2);
}

TEST(PlanBatches, RaisesRForLongRows) {
  std::vector<Triplet> t;
  for (std::uint32_t c = 0; c < 20; ++c) t.push_back({0, c, 1.0f});
  const auto plan = plan_batches(SparseMatrix::from_triplets(1, 20, t), 1, 4, 2);
  EXPECT_EQ(plan.dense_rows, 5u);
}

TEST(Gramian, HandExampleAnySharding) {
  RowMatrixF h(3, 2);
  h << 1, 0, 0, 1, 1, 1;
  Eigen::MatrixXf expect(2, 2);
  expect << 2, 1, 1, 2;
  for (std::uint32_t M : {1u, 2u, 3u}) EXPECT_EQ(compute_gramian(shard_table(h, M, Side::kItems)).g, expect);
  EXPECT_TRUE(compute_gramian(shard_table(RowMatrixF::Zero(5, 3), 2, Side::kItems)).g.isZero());
}

TEST(Gramian, MatchesDenseOracle) {
  const auto h = random_table(1000, 16, 1);
  CommStats stats;
  const auto g = compute_gramian(shard_table(h, 4, Side::kItems), &stats);
  const Eigen::MatrixXd oracle = h.cast<double>().transpose() * h.cast<double>();
  EXPECT_LE((g.g.cast<double>() - oracle).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(stats.phase(CommPhase::kGramian).all_reduce_elems, 4u * 16 * 16);
}

TEST(HalfPass, ScalarExample) {
  // One user, one item, y = 1, alpha = 0, lambda = 0.1, h = 1: w = 1 / 1.1.
  const auto m = SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0f}});
  auto hp = small_params(1);
  hp.alpha = 0;
  hp.lambda = 0.1;
  RowMatrixF h(1, 1);
  h << 1;
  const auto items = shard_table(h, 1, Side::kItems);
  auto users = shard_table(RowMatrixF::Zero(1, 1), 1, Side::kUsers);
  for (Solver s : {Solver::kCholesky, Solver::kLu, Solver::kQr, Solver::kCg}) {
    hp.solver = s;
    half_pass(m, items, users, hp);
    EXPECT_NEAR(users[0].data(0, 0), 1.0 / 1.1, 1e-6) << to_string(s);
  }
}

TEST(HalfPass, LargeLambdaShrinksToZero) {
  const auto m = testing::random_sparse(30, 20, 0.3, 2);
  auto hp = small_params(4);
  hp.lambda = 1e9;
  const auto items = shard_table(random_table(20, 4, 1), 1, Side::kItems);
  auto users = shard_table(random_table(30, 4, 2), 1, Side::kUsers);
  half_pass(m, items, users, hp);
  EXPECT_LE(users[0].data.cwiseAbs().maxCoeff(), 1e-6f);
}

TEST(HalfPass, EveryRowUpdatedAndEmptyRowsZeroed) {
  auto m = testing::random_sparse(40, 30, 0.2, 4);
  // Make rows 5 and 17 empty.
  std::vector<Triplet> t;
  for (const auto& e : m.triplets()) {
    if (e.row != 5 && e.row != 17) t.push_back(e);
  }
  m = SparseMatrix::from_triplets(40, 30, t);
  auto hp = small_params(3, 3);
  hp.batch_rows = 4;
  const auto items = shard_table(random_table(30, 3, 5), 3, Side::kItems);
  const RowMatrixF start = RowMatrixF::Constant(40, 3, 7.0f);
  auto users = shard_table(start, 3, Side::kUsers);
  const auto result = half_pass(m, items, users, hp);
  const auto w = concat_shards(users);
  for (Eigen::Index r = 0; r < 40; ++r) {
    if (r == 5 || r == 17) {
      EXPECT_TRUE(w.row(r).isZero()) << r;
    } else {
      EXPECT_NE(w(r, 0), 7.0f) << r;
    }
  }
  std::uint64_t solves = 0, zeroed = 0;
  for (const auto& c : result.workers) {
    solves += c.solves;
    zeroed += c.zeroed_rows;
    EXPECT_EQ(c.batches, result.plan.num_steps);
  }
  EXPECT_EQ(solves, 38u);
  EXPECT_EQ(zeroed, 2u);
}

TEST(HalfPass, ShardInvariance) {
  const auto m = synth_low_rank(100, 120, 4, 10, 1);
  const auto h = random_table(120, 8, 7);
  RowMatrixF ref;
  for (std::uint32_t M : {1u, 2u, 4u}) {
    auto hp = small_params(8, M);
    hp.batch_rows = 8;
    auto users = shard_table(RowMatrixF::Zero(100, 8), M, Side::kUsers);
    half_pass(m, shard_table(h, M, Side::kItems), users, hp);
    const auto w = concat_shards(users);
    if (M == 1) {
      ref = w;
    } else {
      EXPECT_LE((w - ref).cwiseAbs().maxCoeff(), 1e-5f) << "M=" << M;
    }
  }
}

TEST(HalfPass, StatsModesAgree) {
  const auto m = synth_low_rank(60, 80, 4, 9, 2);
  const auto h = random_table(80, 6, 3);
  for (std::uint32_t M : {1u, 3u}) {
    auto hp = small_params(6, M);
    hp.batch_rows = 5;
    auto a = shard_table(RowMatrixF::Zero(60, 6), M, Side::kUsers);
    auto b = a;
    CommStats sa, sb;
    half_pass(m, shard_table(h, M, Side::kItems), a, hp, &sa);
    hp.stats_mode = StatsMode::kStatsReduce;
    const auto res = half_pass(m, shard_table(h, M, Side::kItems), b, hp, &sb);
    EXPECT_LE((concat_shards(a) - concat_shards(b)).cwiseAbs().maxCoeff(), 1e-4f);
    EXPECT_EQ(sb.phase(CommPhase::kStats).all_reduce_elems,
              static_cast<std::uint64_t>(M) * res.plan.total_batches() * res.plan.dense_rows * 6 * 7);
    EXPECT_EQ(sb.phase(CommPhase::kGatherEmbeddings).all_reduce_elems, 0u);
  }
}

TEST(Objective, ZeroTables) {
  const auto m = SparseMatrix::from_triplets(3, 4, {{0, 1, 2.0f}, {2, 3, -1.5f}});
  auto hp = small_params(2);
  EXPECT_DOUBLE_EQ(compute_objective(RowMatrixF::Zero(3, 2), RowMatrixF::Zero(4, 2), m, hp), 4.0 + 2.25);
}

TEST(Objective, PerfectFactorization) {
  const auto w = random_table(5, 2, 1);
  const auto h = random_table(6, 2, 2);
  std::vector<Triplet> t;
  const RowMatrixF y = w * h.transpose();
  for (std::uint32_t u = 0; u < 5; ++u) {
    for (std::uint32_t i = 0; i < 6; i += 2) t.push_back({u, i, y(u, i)});
  }
  auto hp = small_params(2);
  hp.alpha = 0;
  hp.lambda = 0;
  EXPECT_NEAR(compute_objective(w, h, SparseMatrix::from_triplets(5, 6, t), hp), 0.0, 1e-10);
}

TEST(Objective, MatchesBruteForce) {
  const auto w = random_table(5, 3, 3);
  const auto h = random_table(6, 3, 4);
  const auto m = testing::random_sparse(5, 6, 0.4, 5);
  auto hp = small_params(3);
  hp.alpha = 0.3;
  hp.lambda = 0.07;
  double brute = 0.0;
  for (int u = 0; u < 5; ++u) {
    for (int i = 0; i < 6; ++i) {
      double pred = 0.0;
      for (int k = 0; k < 3; ++k) pred += static_cast<double>(w(u, k)) * h(i, k);
      brute += hp.alpha * pred * pred;
    }
  }
  for (const auto& e : m.triplets()) {
    double pred = 0.0;
    for (int k = 0; k < 3; ++k) pred += static_cast<double>(w(e.row, k)) * h(e.col, k);
    brute += (e.value - pred) * (e.value - pred);
  }
  brute += hp.lambda * (w.cast<double>().squaredNorm() + h.cast<double>().squaredNorm());
  EXPECT_NEAR(compute_objective(w, h, m, hp), brute, 1e-9 * std::abs(brute));
}

TEST(Objective, NonFiniteThrows) {
  RowMatrixF w = RowMatrixF::Zero(2, 2);
  w(0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(compute_objective(w, RowMatrixF::Ones(2, 2), SparseMatrix::from_triplets(2, 2, {}), small_params(2)),
               NumericalError);
}

TEST(Train, ZeroEpochsKeepsInitialState) {
  const auto m = testing::random_sparse(20, 15, 0.3, 1);
  auto hp = small_params(4, 2);
  hp.epochs = 0;
  const auto state = train(m, hp);
  const auto init = init_state(m, hp);
  EXPECT_EQ(concat_shards(state.users), concat_shards(init.users));
  EXPECT_EQ(concat_shards(state.items), concat_shards(init.items));
  EXPECT_TRUE(state.log.empty());
}

TEST(Train, MonotoneWithExactSolvers) {
  const auto m = synth_low_rank(150, 180, 5, 12, 4);
  for (Solver s : {Solver::kCholesky, Solver::kLu, Solver::kQr}) {
    auto hp = small_params(8, 2);
    hp.solver = s;
    hp.epochs = 4;
    const auto state = train(m, hp);
    ASSERT_EQ(state.log.size(), 8u);
    double prev = compute_objective(concat_shards(init_state(m, hp).users), concat_shards(init_state(m, hp).items),
                                    m, hp);
    for (const auto& entry : state.log) {
      EXPECT_LE(entry.objective, prev + 1e-9 * std::abs(prev)) << to_string(s);
      prev = entry.objective;
    }
  }
}

TEST(Train, Bf16TablesStayRepresentable) {
  const auto m = synth_low_rank(80, 90, 4, 10, 5);
  auto hp = small_params(8, 2);
  hp.precision = Precision::kBf16Storage;
  hp.solver = Solver::kCg;
  const auto state = train(m, hp);
  EXPECT_TRUE(all_bf16_representable(state.users));
  EXPECT_TRUE(all_bf16_representable(state.items));
}

TEST(Train, MetricsAndCheckpoint) {
  const auto dir = testing::scratch_dir();
  const auto m = testing::random_sparse(30, 25, 0.2, 6);
  auto hp = small_params(4, 2);
  std::vector<nlohmann::json> lines;
  TrainOptions opts;
  opts.checkpoint = dir / "ckpt";
  opts.on_half_pass = [&](const HalfPassMetrics& x) { lines.push_back(x.to_json()); };
  const auto state = train(m, hp, opts);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0]["side"], "users");
  EXPECT_EQ(lines[1]["side"], "items");
  EXPECT_EQ(lines[3]["epoch"], 1);
  EXPECT_TRUE(lines[0].contains("padding_fraction"));
  EXPECT_TRUE(lines[0]["comm"].contains("phases"));
  const auto ckpt = load_checkpoint(dir / "ckpt");
  EXPECT_EQ(ckpt.users, concat_shards(state.users));
  EXPECT_EQ(ckpt.items, concat_shards(state.items));
}

TEST(Train, FailureWritesPartialCheckpoint) {
  const auto dir = testing::scratch_dir();
  const auto m = SparseMatrix::from_triplets(
      4, 3, {{0, 0, 1.0f}, {1, 1, 1.0f}, {2, 2, std::numeric_limits<float>::quiet_NaN()}, {3, 0, 1.0f}});
  auto hp = small_params(2);
  hp.num_shards = 2;
  TrainOptions opts;
  opts.checkpoint = dir / "ckpt";
  EXPECT_THROW(train(m, hp, opts), NumericalError);
  EXPECT_TRUE(std::filesystem::exists(dir / "ckpt"));
  EXPECT_NO_THROW(load_checkpoint(dir / "ckpt"));
}

}  // namespace
}  // namespace alsx
