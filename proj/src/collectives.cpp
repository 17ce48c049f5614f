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

#include "alsx/collectives.hpp"

#include <algorithm>

namespace alsx {

std::string_view to_string(CommPhase phase) {
  switch (phase) {
    case CommPhase::kGramian: return "gramian";
    case CommPhase::kGatherIds: return "gather_ids";
    case CommPhase::kGatherEmbeddings: return "gather_embeddings";
    case CommPhase::kScatter: return "scatter";
    case CommPhase::kStats: return "stats";
    case CommPhase::kOther: return "other";
  }
  return "?";
}

void CommStats::record_all_gather(CommPhase p, std::uint32_t workers, std::uint64_t local_elems) {
  const CommCounts delta{static_cast<std::uint64_t>(workers) * (workers - 1) * local_elems, 0, 1};
  total += delta;
  by_phase[static_cast<std::size_t>(p)] += delta;
}

void CommStats::record_all_reduce(CommPhase p, std::uint32_t workers, std::uint64_t tensor_elems) {
  const CommCounts delta{0, static_cast<std::uint64_t>(workers) * tensor_elems, 1};
  total += delta;
  by_phase[static_cast<std::size_t>(p)] += delta;
}

CommStats& CommStats::operator+=(const CommStats& o) {
  total += o.total;
  for (std::size_t i = 0; i < kNumCommPhases; ++i) by_phase[i] += o.by_phase[i];
  return *this;
}

nlohmann::json CommStats::to_json() const {
  nlohmann::json phases = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumCommPhases; ++i) {
    const auto& c = by_phase[i];
    if (c.invocations == 0) continue;
    phases[std::string(to_string(static_cast<CommPhase>(i)))] = {
        {"all_gather_elems", c.all_gather_elems},
        {"all_reduce_elems", c.all_reduce_elems},
        {"invocations", c.invocations},
    };
  }
  return {
      {"all_gather_elems", total.all_gather_elems},
      {"all_reduce_elems", total.all_reduce_elems},
      {"invocations", total.invocations},
      {"phases", std::move(phases)},
  };
}

void Barrier::arrive_and_wait() {
  std::unique_lock lock(mu_);
  if (cancelled_) throw CollectiveError("worker group cancelled");
  const auto gen = generation_;
  if (++arrived_ == participants_) {
    arrived_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  const bool released =
      cv_.wait_for(lock, timeout_, [&] { return generation_ != gen || cancelled_; });
  if (generation_ != gen) return;
  if (!released) {
    cancelled_ = true;
    cv_.notify_all();
    throw CollectiveError(fmt::format("collective timed out after {} ms waiting for {} of {} workers",
                                      timeout_.count(), participants_ - arrived_, participants_));
  }
  throw CollectiveError("worker group cancelled");
}

void Barrier::cancel() {
  std::lock_guard lock(mu_);
  cancelled_ = true;
  cv_.notify_all();
}

bool Barrier::cancelled() const {
  std::lock_guard lock(mu_);
  return cancelled_;
}

WorkerGroup::WorkerGroup(std::uint32_t size, std::chrono::milliseconds timeout)
    : size_(size), barrier_(size, timeout), slots_(size) {
  if (size < 1) throw ConfigError("worker group needs at least one worker");
}

void WorkerGroup::publish(std::uint32_t rank, const void* data, std::size_t size) {
  if (rank >= size_) throw CollectiveError(fmt::format("rank {} outside group of {}", rank, size_));
  slots_[rank] = {data, size};
}

void WorkerGroup::check_equal_sizes(const char* op) const {
  for (std::uint32_t w = 1; w < size_; ++w) {
    if (slots_[w].size != slots_[0].size) {
      throw CollectiveError(fmt::format("{}: worker {} contributed {} elements, worker 0 contributed {}", op,
                                        w, slots_[w].size, slots_[0].size));
    }
  }
}

std::vector<float> sharded_gather(Worker& worker, const EmbeddingShard& local, std::uint64_t num_rows,
                                  std::span<const std::uint32_t> ids) {
  const std::size_t d = local.dim();
  const auto all_ids = worker.all_gather(ids, CommPhase::kGatherIds);
  for (auto id : all_ids) {
    if (id > num_rows) {
      throw DataError(fmt::format("sharded_gather: id {} beyond table of {} rows", id, num_rows));
    }
  }
  std::vector<float> stacked(all_ids.size() * d, 0.0f);
  for (std::size_t i = 0; i < all_ids.size(); ++i) {
    const auto id = all_ids[i];
    if (id == num_rows || !local.rows.contains(id)) continue;
    const auto row = local.data.row(static_cast<Eigen::Index>(id - local.rows.begin));
    std::copy(row.data(), row.data() + d, stacked.data() + i * d);
  }
  auto reduced = worker.all_reduce_sum(std::span<const float>(stacked), CommPhase::kGatherEmbeddings);
  const std::size_t slice = ids.size() * d;
  const auto begin = reduced.begin() + static_cast<std::ptrdiff_t>(worker.rank() * slice);
  return std::vector<float>(begin, begin + static_cast<std::ptrdiff_t>(slice));
}

void sharded_scatter(Worker& worker, EmbeddingShard& local, std::uint64_t num_rows,
                     std::span<const std::uint32_t> ids, std::span<const float> embeddings) {
  const std::size_t d = local.dim();
  if (embeddings.size() != ids.size() * d) {
    throw ConfigError(fmt::format("sharded_scatter: {} ids but {} embedding floats (d={})", ids.size(),
                                  embeddings.size(), d));
  }
  const auto all_ids = worker.all_gather(ids, CommPhase::kScatter);
  const auto all_emb = worker.all_gather(embeddings, CommPhase::kScatter);

  std::vector<std::uint32_t> sorted;
  sorted.reserve(all_ids.size());
  for (auto id : all_ids) {
    if (id > num_rows) {
      throw DataError(fmt::format("sharded_scatter: id {} beyond table of {} rows", id, num_rows));
    }
    if (id != num_rows) sorted.push_back(id);
  }
  std::sort(sorted.begin(), sorted.end());
  if (const auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw CollectiveError(fmt::format("sharded_scatter: row {} scattered more than once", *dup));
  }
  for (std::size_t i = 0; i < all_ids.size(); ++i) {
    const auto id = all_ids[i];
    if (id == num_rows || !local.rows.contains(id)) continue;
    auto row = local.data.row(static_cast<Eigen::Index>(id - local.rows.begin));
    std::copy(all_emb.data() + i * d, all_emb.data() + (i + 1) * d, row.data());
  }
}

}  // namespace alsx
