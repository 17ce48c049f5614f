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

#ifndef ALSX_TRAINER_HPP_
#define ALSX_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "alsx/checkpoint.hpp"
#include "alsx/collectives.hpp"
#include "alsx/embedding.hpp"
#include "alsx/hyperparams.hpp"
#include "alsx/solvers.hpp"
#include "alsx/sparse_matrix.hpp"

namespace alsx {

// Operation counts of one worker during a half-pass. `slot_updates` counts
// rank-one updates of the normal equations (one per dense slot processed,
// padding included), each Theta(d^2); `solves` counts d x d solves.
struct WorkerCounters {
  std::uint64_t slot_updates = 0;
  std::uint64_t solves = 0;
  std::uint64_t batches = 0;
  std::uint64_t zeroed_rows = 0;
};

// Assignment of the rows of one side to workers and batches. Rows go to
// worker (row mod M) in ascending order and are packed greedily into batches
// of at most `dense_rows` dense rows. Rows without observations are left out.
struct BatchPlan {
  std::uint32_t dense_rows = 0;  // R actually used (>= requested when a row needs more)
  std::uint32_t row_len = 0;     // L
  std::size_t num_steps = 0;     // batches per worker, max over workers
  std::vector<std::vector<std::vector<std::uint32_t>>> rows;  // [worker][batch] -> source rows
  std::uint64_t observed_slots = 0;  // nnz covered by the plan
  std::uint64_t dense_slots = 0;     // slots of non-padding dense rows

  std::uint64_t total_batches() const { return num_steps * rows.size(); }
  std::uint64_t fixed_slots() const { return total_batches() * dense_rows * row_len; }
};

BatchPlan plan_batches(const SparseMatrix& m, std::uint32_t workers, std::uint32_t row_len,
                       std::uint32_t dense_rows);

struct HalfPassMetrics {
  std::uint32_t epoch = 0;
  Side side = Side::kUsers;
  double objective = 0.0;
  double seconds = 0.0;
  CommStats comm;  // cumulative since the start of the epoch
  std::vector<WorkerCounters> workers;
  std::uint32_t dense_rows = 0;
  std::uint64_t batches = 0;
  std::uint64_t observed_slots = 0;
  std::uint64_t fixed_slots = 0;

  double padding_fraction() const {
    return fixed_slots == 0 ? 0.0 : 1.0 - static_cast<double>(observed_slots) / static_cast<double>(fixed_slots);
  }
  // {epoch, side, objective, seconds, comm:{...}, padding_fraction, ...}
  nlohmann::json to_json() const;
};

struct TrainState {
  ShardedTable users;
  ShardedTable items;
  std::uint32_t epoch = 0;
  std::vector<HalfPassMetrics> log;
};

// G = sum over shards of H_mu^T H_mu, all-reduced across the group.
Gramian compute_gramian(Worker& worker, const EmbeddingShard& local);
// Same, launched on one worker per shard.
Gramian compute_gramian(const ShardedTable& table, CommStats* stats = nullptr);

struct HalfPassResult {
  std::vector<WorkerCounters> workers;
  BatchPlan plan;
};

// Re-solves every row of `solved` against the fixed table. `m` has the rows of
// the solved side (S for the user pass, S^T for the item pass). Rows with no
// observations are set to zero.
HalfPassResult half_pass(const SparseMatrix& m, const ShardedTable& fixed, ShardedTable& solved,
                         const HyperParams& hp, CommStats* stats = nullptr);

// Sum over S of (y - <w,h>)^2 + alpha sum_u w^T (H^T H) w + lambda (|W|^2 + |H|^2),
// in double precision. Throws NumericalError if the result is not finite.
double compute_objective(const RowMatrixF& users, const RowMatrixF& items, const SparseMatrix& train,
                         const HyperParams& hp);

TrainState init_state(const SparseMatrix& train, const HyperParams& hp);

struct TrainOptions {
  std::function<void(const HalfPassMetrics&)> on_half_pass;
  // Written at the end, and also when a pass fails (then holding whatever
  // rows were updated before the failure).
  std::optional<std::filesystem::path> checkpoint;
  bool track_objective = true;
};

// hp.epochs epochs of (user pass, item pass) starting from init_state.
TrainState train(const SparseMatrix& train, const HyperParams& hp, const TrainOptions& options = {});

// Continues an existing state for hp.epochs more epochs.
void run_epochs(TrainState& state, const SparseMatrix& train, const SparseMatrix& train_t,
                const HyperParams& hp, const TrainOptions& options = {});

Checkpoint to_checkpoint(const TrainState& state, Precision precision);

}  // namespace alsx

#endif  // ALSX_TRAINER_HPP_
