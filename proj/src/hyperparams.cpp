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

#include "alsx/hyperparams.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "alsx/error.hpp"

namespace alsx {

void HyperParams::validate() const {
  if (dim < 1) throw ConfigError("d must be >= 1");
  if (dense_row_len < 1) throw ConfigError("dense_row_len must be >= 1");
  if (batch_rows < 1) throw ConfigError("batch_rows must be >= 1");
  if (num_shards < 1) throw ConfigError("num_shards must be >= 1");
  if (!(cg_tol > 0.0) || !std::isfinite(cg_tol)) throw ConfigError("cg_tol must be finite and > 0");
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ConfigError(fmt::format("lambda must be finite and >= 0, got {}", lambda));
  }
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError(fmt::format("alpha must be finite and >= 0, got {}", alpha));
  }
}

std::string_view to_string(Solver s) {
  switch (s) {
    case Solver::kCholesky: return "cholesky";
    case Solver::kLu: return "lu";
    case Solver::kQr: return "qr";
    case Solver::kCg: return "cg";
  }
  return "?";
}

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::kF32: return "f32";
    case Precision::kBf16Storage: return "bf16_storage";
    case Precision::kBf16All: return "bf16_all";
  }
  return "?";
}

std::string_view to_string(StatsMode m) {
  switch (m) {
    case StatsMode::kEmbeddingGather: return "embedding_gather";
    case StatsMode::kStatsReduce: return "stats_reduce";
  }
  return "?";
}

std::string_view to_string(Side s) { return s == Side::kUsers ? "users" : "items"; }

Solver parse_solver(std::string_view name) {
  for (Solver s : {Solver::kCholesky, Solver::kLu, Solver::kQr, Solver::kCg}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError(fmt::format("unknown solver '{}' (expected cholesky, lu, qr or cg)", name));
}

Precision parse_precision(std::string_view name) {
  for (Precision p : {Precision::kF32, Precision::kBf16Storage, Precision::kBf16All}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError(fmt::format("unknown precision '{}' (expected f32, bf16_storage or bf16_all)", name));
}

StatsMode parse_stats_mode(std::string_view name) {
  for (StatsMode m : {StatsMode::kEmbeddingGather, StatsMode::kStatsReduce}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError(
      fmt::format("unknown stats mode '{}' (expected embedding_gather or stats_reduce)", name));
}

}  // namespace alsx
