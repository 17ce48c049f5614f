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

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "alsx/bf16.hpp"
#include "alsx/dense_batch.hpp"
#include "alsx/error.hpp"

namespace alsx {

BatchPlan plan_batches(const SparseMatrix& m, std::uint32_t workers, std::uint32_t row_len,
                       std::uint32_t dense_rows) {
  if (workers < 1 || row_len < 1 || dense_rows < 1) throw ConfigError("invalid batch plan parameters");
  BatchPlan plan;
  plan.row_len = row_len;
  plan.dense_rows = dense_rows;
  for (std::uint64_t r = 0; r < m.num_rows(); ++r) {
    const auto need = dense_rows_for(m.row_len(r), row_len);
    if (need > plan.dense_rows) plan.dense_rows = static_cast<std::uint32_t>(need);
  }
  if (plan.dense_rows != dense_rows) {
    spdlog::debug("batch_rows raised from {} to {} to fit the longest row", dense_rows, plan.dense_rows);
  }
  plan.rows.assign(workers, {});
  for (std::uint32_t w = 0; w < workers; ++w) {
    auto& batches = plan.rows[w];
    std::uint64_t fill = 0;
    for (std::uint64_t r = w; r < m.num_rows(); r += workers) {
      const auto len = m.row_len(r);
      if (len == 0) continue;
      const auto need = dense_rows_for(len, row_len);
      if (batches.empty() || fill + need > plan.dense_rows) {
        batches.emplace_back();
        fill = 0;
      }
      batches.back().push_back(static_cast<std::uint32_t>(r));
      fill += need;
      plan.observed_slots += len;
      plan.dense_slots += need * row_len;
    }
    plan.num_steps = std::max(plan.num_steps, batches.size());
  }
  return plan;
}

nlohmann::json HalfPassMetrics::to_json() const {
  nlohmann::json per_worker = nlohmann::json::array();
  for (const auto& w : workers) {
    per_worker.push_back({{"slot_updates", w.slot_updates}, {"solves", w.solves}, {"batches", w.batches}});
  }
  return {
      {"epoch", epoch},
      {"side", std::string(to_string(side))},
      {"objective", objective},
      {"seconds", seconds},
      {"comm", comm.to_json()},
      {"dense_rows", dense_rows},
      {"batches", batches},
      {"padding_fraction", padding_fraction()},
      {"workers", std::move(per_worker)},
  };
}

Gramian compute_gramian(Worker& worker, const EmbeddingShard& local) {
  const Gramian partial = local_gramian(local.data);
  const auto d = partial.dim();
  auto summed = worker.all_reduce_sum(
      std::span<const float>(partial.g.data(), static_cast<std::size_t>(partial.g.size())), CommPhase::kGramian);
  Gramian g{Eigen::Map<Eigen::MatrixXf>(summed.data(), d, d)};
  return g;
}

Gramian compute_gramian(const ShardedTable& table, CommStats* stats) {
  auto results = run_spmd(
      static_cast<std::uint32_t>(table.size()),
      [&](Worker& w) { return compute_gramian(w, table[w.rank()]); }, stats);
  return std::move(results.front());
}

namespace {

// Reads the rows this worker owns into a slots x d buffer, zeros elsewhere.
std::vector<float> local_lookup(const EmbeddingShard& local, std::span<const std::uint32_t> ids) {
  const std::size_t d = local.dim();
  std::vector<float> out(ids.size() * d, 0.0f);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!local.rows.contains(ids[i])) continue;
    const auto row = local.data.row(static_cast<Eigen::Index>(ids[i] - local.rows.begin));
    std::copy(row.data(), row.data() + d, out.data() + i * d);
  }
  return out;
}

// Statistics-all-reduce variant: every worker builds partial statistics for
// all batches of the step from its local shard only; the partials of each
// batch are then summed across workers.
std::vector<NormalEq> reduce_stats(Worker& worker, const DenseBatch& batch, const EmbeddingShard& fixed,
                                   const Gramian& gramian, const HyperParams& hp) {
  const std::uint32_t M = worker.size();
  const std::size_t R = batch.num_dense_rows();
  const std::size_t L = batch.row_len;
  const std::size_t d = hp.dim;
  const std::size_t stride = d * d + d;

  std::vector<std::uint32_t> sources(R, kPaddingRow);
  std::copy(batch.source_rows.begin(), batch.source_rows.end(), sources.begin());
  const auto all_ids = worker.all_gather(std::span<const std::uint32_t>(batch.ids), CommPhase::kStats);
  const auto all_vals = worker.all_gather(std::span<const float>(batch.vals), CommPhase::kStats);
  const auto all_map = worker.all_gather(std::span<const std::uint32_t>(batch.row_map), CommPhase::kStats);
  const auto all_src = worker.all_gather(std::span<const std::uint32_t>(sources), CommPhase::kStats);

  std::vector<float> partial(M * R * stride, 0.0f);
  for (std::uint32_t mu = 0; mu < M; ++mu) {
    DenseBatch peer;
    peer.row_len = batch.row_len;
    peer.pad_id = batch.pad_id;
    peer.ids.assign(all_ids.begin() + mu * R * L, all_ids.begin() + (mu + 1) * R * L);
    peer.vals.assign(all_vals.begin() + mu * R * L, all_vals.begin() + (mu + 1) * R * L);
    peer.row_map.assign(all_map.begin() + mu * R, all_map.begin() + (mu + 1) * R);
    peer.mask.resize(peer.ids.size());
    for (std::size_t i = 0; i < peer.ids.size(); ++i) peer.mask[i] = peer.ids[i] != peer.pad_id;
    for (std::size_t s = 0; s < R && all_src[mu * R + s] != kPaddingRow; ++s) {
      peer.source_rows.push_back(all_src[mu * R + s]);
    }
    const auto emb = local_lookup(fixed, peer.ids);
    const auto eqs = accumulate_observed(peer, emb, hp.dim);
    for (std::size_t s = 0; s < eqs.size(); ++s) {
      float* dst = partial.data() + (mu * R + s) * stride;
      std::copy(eqs[s].lhs.data(), eqs[s].lhs.data() + d * d, dst);
      std::copy(eqs[s].rhs.data(), eqs[s].rhs.data() + d, dst + d * d);
    }
  }
  const auto reduced = worker.all_reduce_sum(std::span<const float>(partial), CommPhase::kStats);

  std::vector<NormalEq> eqs(batch.source_rows.size());
  const float* mine = reduced.data() + worker.rank() * R * stride;
  for (std::size_t s = 0; s < eqs.size(); ++s) {
    eqs[s].row = batch.source_rows[s];
    eqs[s].lhs = Eigen::Map<const Eigen::MatrixXf>(mine + s * stride, d, d);
    eqs[s].rhs = Eigen::Map<const Eigen::VectorXf>(mine + s * stride + d * d, d);
    add_prior(eqs[s], gramian, hp);
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (batch.row_map[r] == kPaddingRow) continue;
    for (std::size_t k = 0; k < L; ++k) eqs[batch.row_map[r]].num_observations += batch.mask[r * L + k];
  }
  return eqs;
}

}  // namespace

HalfPassResult half_pass(const SparseMatrix& m, const ShardedTable& fixed, ShardedTable& solved,
                         const HyperParams& hp, CommStats* stats) {
  hp.validate();
  const auto M = static_cast<std::uint32_t>(solved.size());
  if (fixed.size() != M) {
    throw ConfigError(fmt::format("fixed table has {} shards, solved table has {}", fixed.size(), M));
  }
  const auto fixed_rows = layout_of(fixed).num_rows();
  const auto solved_rows = layout_of(solved).num_rows();
  if (m.num_rows() != solved_rows || m.num_cols() != fixed_rows) {
    throw ConfigError(fmt::format("matrix is {}x{} but tables have {} and {} rows", m.num_rows(), m.num_cols(),
                                  solved_rows, fixed_rows));
  }
  HalfPassResult result;
  result.plan = plan_batches(m, M, hp.dense_row_len, hp.batch_rows);
  const auto& plan = result.plan;
  const std::size_t d = hp.dim;

  result.workers = run_spmd(
      M,
      [&](Worker& worker) {
        WorkerCounters counters;
        const auto rank = worker.rank();
        const Gramian gramian = compute_gramian(worker, fixed[rank]);
        auto& mine = solved[rank];
        for (auto r = mine.rows.begin; r < mine.rows.end; ++r) {
          if (m.row_len(r) != 0) continue;
          mine.data.row(static_cast<Eigen::Index>(r - mine.rows.begin)).setZero();
          ++counters.zeroed_rows;
        }
        const auto& my_batches = plan.rows[rank];
        for (std::size_t step = 0; step < plan.num_steps; ++step) {
          std::span<const std::uint32_t> rows;
          if (step < my_batches.size()) rows = my_batches[step];
          DenseBatch batch = densify(m, rows, plan.row_len);
          counters.slot_updates += batch.num_slots();
          pad_dense_rows(batch, plan.dense_rows);

          std::vector<NormalEq> eqs;
          if (hp.stats_mode == StatsMode::kEmbeddingGather) {
            const auto emb = sharded_gather(worker, fixed[rank], fixed_rows, batch.ids);
            eqs = accumulate_stats(batch, emb, gramian, hp);
          } else {
            eqs = reduce_stats(worker, batch, fixed[rank], gramian, hp);
          }

          std::vector<std::uint32_t> ids(plan.dense_rows, static_cast<std::uint32_t>(solved_rows));
          std::vector<float> solutions(ids.size() * d, 0.0f);
          for (std::size_t s = 0; s < eqs.size(); ++s) {
            const Eigen::VectorXf x = solve(eqs[s], hp.solver, hp);
            ids[s] = eqs[s].row;
            std::copy(x.data(), x.data() + d, solutions.data() + s * d);
            ++counters.solves;
          }
          sharded_scatter(worker, mine, solved_rows, ids, solutions);
          ++counters.batches;
        }
        return counters;
      },
      stats);
  return result;
}

double compute_objective(const RowMatrixF& users, const RowMatrixF& items, const SparseMatrix& train,
                         const HyperParams& hp) {
  if (static_cast<std::uint64_t>(users.rows()) != train.num_rows() ||
      static_cast<std::uint64_t>(items.rows()) != train.num_cols() || users.cols() != items.cols()) {
    throw ConfigError("objective: table shapes do not match the training matrix");
  }
  double loss = 0.0;
  for (std::uint64_t r = 0; r < train.num_rows(); ++r) {
    const auto cols = train.row_cols(r);
    const auto vals = train.row_values(r);
    const Eigen::VectorXd w = users.row(static_cast<Eigen::Index>(r)).cast<double>();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double pred = w.dot(items.row(cols[k]).cast<double>().transpose());
      const double e = static_cast<double>(vals[k]) - pred;
      loss += e * e;
    }
  }
  const RowMatrixD wd = users.cast<double>();
  const RowMatrixD hd = items.cast<double>();
  const Eigen::MatrixXd gw = wd.transpose() * wd;
  const Eigen::MatrixXd gh = hd.transpose() * hd;
  // sum_u w_u^T G w_u = <W^T W, H^T H>_F
  const double all_pairs = gw.cwiseProduct(gh).sum();
  const double objective = loss + hp.alpha * all_pairs + hp.lambda * (gw.trace() + gh.trace());
  if (!std::isfinite(objective)) throw NumericalError("objective is not finite");
  return objective;
}

TrainState init_state(const SparseMatrix& train, const HyperParams& hp) {
  hp.validate();
  TrainState state;
  state.users = init_embeddings(train.num_rows(), hp, Side::kUsers);
  state.items = init_embeddings(train.num_cols(), hp, Side::kItems);
  return state;
}

Checkpoint to_checkpoint(const TrainState& state, Precision precision) {
  return {concat_shards(state.users), concat_shards(state.items), precision};
}

void run_epochs(TrainState& state, const SparseMatrix& train, const SparseMatrix& train_t,
                const HyperParams& hp, const TrainOptions& options) {
  auto save = [&] {
    if (options.checkpoint) save_checkpoint(*options.checkpoint, to_checkpoint(state, hp.precision));
  };
  try {
    for (std::uint32_t t = 0; t < hp.epochs; ++t) {
      CommStats epoch_comm;
      for (Side side : {Side::kUsers, Side::kItems}) {
        const auto start = std::chrono::steady_clock::now();
        const bool users = side == Side::kUsers;
        auto pass = half_pass(users ? train : train_t, users ? state.items : state.users,
                              users ? state.users : state.items, hp, &epoch_comm);
        HalfPassMetrics metrics;
        metrics.epoch = state.epoch;
        metrics.side = side;
        metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        metrics.comm = epoch_comm;
        metrics.workers = std::move(pass.workers);
        metrics.dense_rows = pass.plan.dense_rows;
        metrics.batches = pass.plan.total_batches();
        metrics.observed_slots = pass.plan.observed_slots;
        metrics.fixed_slots = pass.plan.fixed_slots();
        if (options.track_objective) {
          metrics.objective =
              compute_objective(concat_shards(state.users), concat_shards(state.items), train, hp);
        }
        spdlog::debug("epoch {} {} pass: objective {:.6g} in {:.3f}s", metrics.epoch, to_string(side),
                      metrics.objective, metrics.seconds);
        if (options.on_half_pass) options.on_half_pass(metrics);
        state.log.push_back(std::move(metrics));
      }
      ++state.epoch;
    }
  } catch (const Error&) {
    save();
    throw;
  }
  save();
}

TrainState train(const SparseMatrix& train, const HyperParams& hp, const TrainOptions& options) {
  TrainState state = init_state(train, hp);
  run_epochs(state, train, transpose(train), hp, options);
  return state;
}

}  // namespace alsx
