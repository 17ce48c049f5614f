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

#ifndef ALSX_COLLECTIVES_HPP_
#define ALSX_COLLECTIVES_HPP_

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "alsx/embedding.hpp"
#include "alsx/error.hpp"

namespace alsx {

// What a collective call is part of; used to break communication down.
enum class CommPhase : std::uint8_t {
  kGramian = 0,
  kGatherIds,
  kGatherEmbeddings,
  kScatter,
  kStats,
  kOther,
};
inline constexpr std::size_t kNumCommPhases = 6;
std::string_view to_string(CommPhase phase);

// Element counts moved by collectives. An all-gather of n elements per worker
// delivers M (M - 1) n remote elements; an all-reduce of an n-element tensor
// delivers the n-element result to each of the M workers, M n in total.
struct CommCounts {
  std::uint64_t all_gather_elems = 0;
  std::uint64_t all_reduce_elems = 0;
  std::uint64_t invocations = 0;

  CommCounts& operator+=(const CommCounts& o) {
    all_gather_elems += o.all_gather_elems;
    all_reduce_elems += o.all_reduce_elems;
    invocations += o.invocations;
    return *this;
  }
  friend bool operator==(const CommCounts&, const CommCounts&) = default;
};

struct CommStats {
  CommCounts total;
  std::array<CommCounts, kNumCommPhases> by_phase{};

  const CommCounts& phase(CommPhase p) const { return by_phase[static_cast<std::size_t>(p)]; }
  void record_all_gather(CommPhase p, std::uint32_t workers, std::uint64_t local_elems);
  void record_all_reduce(CommPhase p, std::uint32_t workers, std::uint64_t tensor_elems);
  CommStats& operator+=(const CommStats& o);
  void reset() { *this = CommStats{}; }

  // {"all_gather_elems", "all_reduce_elems", "invocations", "phases": {...}}
  nlohmann::json to_json() const;
};

// Reusable barrier for a fixed number of participants. Waiting fails with
// CollectiveError on timeout or once the barrier has been cancelled.
class Barrier {
 public:
  Barrier(std::uint32_t participants, std::chrono::milliseconds timeout)
      : participants_(participants), timeout_(timeout) {}

  void arrive_and_wait();
  void cancel();
  bool cancelled() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint32_t participants_;
  std::chrono::milliseconds timeout_;
  std::uint32_t arrived_ = 0;
  std::uint64_t generation_ = 0;
  bool cancelled_ = false;
};

inline constexpr std::chrono::milliseconds kDefaultCollectiveTimeout{120'000};

// Shared state of M in-process workers. Collectives are full barriers; every
// worker must issue the same sequence of collective calls.
class WorkerGroup {
 public:
  explicit WorkerGroup(std::uint32_t size, std::chrono::milliseconds timeout = kDefaultCollectiveTimeout);
  WorkerGroup(const WorkerGroup&) = delete;
  WorkerGroup& operator=(const WorkerGroup&) = delete;

  std::uint32_t size() const { return size_; }
  void barrier() { barrier_.arrive_and_wait(); }
  void cancel() { barrier_.cancel(); }
  const CommStats& stats() const { return stats_; }

  // Concatenation of every worker's `local`, in rank order.
  template <typename T>
  std::vector<T> all_gather(std::uint32_t rank, std::span<const T> local, CommPhase phase);

  // Element-wise sum over workers, accumulated in ascending rank order so the
  // result is bit-identical on every worker and across runs.
  template <typename T>
  std::vector<T> all_reduce_sum(std::uint32_t rank, std::span<const T> local, CommPhase phase);

 private:
  struct Slot {
    const void* data = nullptr;
    std::size_t size = 0;
  };

  void publish(std::uint32_t rank, const void* data, std::size_t size);
  void check_equal_sizes(const char* op) const;

  std::uint32_t size_;
  Barrier barrier_;
  std::vector<Slot> slots_;
  CommStats stats_;
};

// A worker's handle: its rank plus the group it belongs to.
class Worker {
 public:
  Worker(std::uint32_t rank, WorkerGroup& group) : rank_(rank), group_(&group) {}

  std::uint32_t rank() const { return rank_; }
  std::uint32_t size() const { return group_->size(); }
  WorkerGroup& group() { return *group_; }

  template <typename T>
  std::vector<T> all_gather(std::span<const T> local, CommPhase phase = CommPhase::kOther) {
    return group_->all_gather(rank_, local, phase);
  }
  template <typename T>
  std::vector<T> all_reduce_sum(std::span<const T> local, CommPhase phase = CommPhase::kOther) {
    return group_->all_reduce_sum(rank_, local, phase);
  }
  void barrier() { group_->barrier(); }

 private:
  std::uint32_t rank_;
  WorkerGroup* group_;
};

// Embeddings for `ids` (each in [0, num_rows], num_rows being the padding
// sentinel) read from a table sharded across the group. All-gathers the id
// batches, fills the rows this worker owns (zeros elsewhere), all-reduce-sums
// the stacked tensor and returns this worker's slice: ids.size() x d floats.
std::vector<float> sharded_gather(Worker& worker, const EmbeddingShard& local, std::uint64_t num_rows,
                                  std::span<const std::uint32_t> ids);

// Writes `embeddings` (ids.size() x d) into the rows `ids` of a sharded table.
// Ids equal to num_rows are padding. Each non-padding id may appear at most
// once across the whole group.
void sharded_scatter(Worker& worker, EmbeddingShard& local, std::uint64_t num_rows,
                     std::span<const std::uint32_t> ids, std::span<const float> embeddings);

// Runs `program(Worker&)` on M workers (rank 0 on the calling thread) and
// returns the per-worker results in rank order. The first exception cancels
// the group and is rethrown after all workers have joined. Communication
// counts are added to `stats` when given.
template <typename Program>
auto run_spmd(std::uint32_t num_workers, Program&& program, CommStats* stats = nullptr,
              std::chrono::milliseconds timeout = kDefaultCollectiveTimeout);

// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> WorkerGroup::all_gather(std::uint32_t rank, std::span<const T> local, CommPhase phase) {
  publish(rank, local.data(), local.size());
  barrier_.arrive_and_wait();
  check_equal_sizes("all_gather");
  std::vector<T> out;
  out.reserve(local.size() * size_);
  for (const auto& slot : slots_) {
    const T* p = static_cast<const T*>(slot.data);
    out.insert(out.end(), p, p + slot.size);
  }
  if (rank == 0) stats_.record_all_gather(phase, size_, local.size());
  barrier_.arrive_and_wait();
  return out;
}

template <typename T>
std::vector<T> WorkerGroup::all_reduce_sum(std::uint32_t rank, std::span<const T> local, CommPhase phase) {
  static_assert(std::is_arithmetic_v<T>);
  publish(rank, local.data(), local.size());
  barrier_.arrive_and_wait();
  check_equal_sizes("all_reduce_sum");
  const auto* first = static_cast<const T*>(slots_[0].data);
  std::vector<T> out(first, first + local.size());
  for (std::uint32_t w = 1; w < size_; ++w) {
    const auto* p = static_cast<const T*>(slots_[w].data);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p[i];
  }
  if (rank == 0) stats_.record_all_reduce(phase, size_, local.size());
  barrier_.arrive_and_wait();
  return out;
}

template <typename Program>
auto run_spmd(std::uint32_t num_workers, Program&& program, CommStats* stats,
              std::chrono::milliseconds timeout) {
  using Result = std::invoke_result_t<Program&, Worker&>;
  if (num_workers < 1) throw ConfigError("run_spmd needs at least one worker");
  WorkerGroup group(num_workers, timeout);
  std::mutex error_mu;
  std::exception_ptr first_error;

  constexpr bool kVoid = std::is_void_v<Result>;
  using Stored = std::conditional_t<kVoid, bool, Result>;
  std::vector<std::optional<Stored>> results(num_workers);

  auto body = [&](std::uint32_t rank) {
    try {
      Worker worker(rank, group);
      if constexpr (kVoid) {
        program(worker);
        results[rank].emplace(true);
      } else {
        results[rank].emplace(program(worker));
      }
    } catch (...) {
      {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
      group.cancel();
    }
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(num_workers - 1);
    for (std::uint32_t rank = 1; rank < num_workers; ++rank) threads.emplace_back(body, rank);
    body(0);
  }
  if (stats != nullptr) *stats += group.stats();
  if (first_error) std::rethrow_exception(first_error);

  if constexpr (!kVoid) {
    std::vector<Result> out;
    out.reserve(num_workers);
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
  }
}

}  // namespace alsx

#endif  // ALSX_COLLECTIVES_HPP_
