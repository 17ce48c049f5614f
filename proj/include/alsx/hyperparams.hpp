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

#ifndef ALSX_HYPERPARAMS_HPP_
#define ALSX_HYPERPARAMS_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace alsx {

enum class Solver { kCholesky, kLu, kQr, kCg };

// kBf16All is a demonstration mode only: besides bf16 tables it also rounds
// the Gramian and the normal equations to bf16 before solving. It reproduces
// the instability of running the whole update in low precision.
enum class Precision { kF32, kBf16Storage, kBf16All };

enum class StatsMode { kEmbeddingGather, kStatsReduce };

enum class Side : std::uint8_t { kUsers = 0, kItems = 1 };

struct HyperParams {
  std::uint32_t dim = 128;
  double lambda = 5e-2;
  double alpha = 1e-6;
  std::uint32_t epochs = 16;
  Solver solver = Solver::kCg;
  std::uint32_t cg_iters = 0;  // 0 means "use dim"
  double cg_tol = 1e-5;
  std::uint32_t dense_row_len = 8;
  std::uint32_t batch_rows = 4096;  // dense rows per batch, per worker
  Precision precision = Precision::kBf16Storage;
  std::uint64_t seed = 0;
  std::uint32_t num_shards = 1;
  StatsMode stats_mode = StatsMode::kEmbeddingGather;

  std::uint32_t effective_cg_iters() const { return cg_iters == 0 ? dim : cg_iters; }
  bool bf16_tables() const { return precision != Precision::kF32; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

std::string_view to_string(Solver s);
std::string_view to_string(Precision p);
std::string_view to_string(StatsMode m);
std::string_view to_string(Side s);

// Throw ConfigError on unknown names.
Solver parse_solver(std::string_view name);
Precision parse_precision(std::string_view name);
StatsMode parse_stats_mode(std::string_view name);

}  // namespace alsx

#endif  // ALSX_HYPERPARAMS_HPP_
