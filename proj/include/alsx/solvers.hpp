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

#ifndef ALSX_SOLVERS_HPP_
#define ALSX_SOLVERS_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "alsx/dense_batch.hpp"
#include "alsx/embedding.hpp"
#include "alsx/hyperparams.hpp"

namespace alsx {

// d x d Gramian of an embedding table (H^T H or W^T W). Stored full, with the
// lower triangle mirrored from the upper so it is exactly symmetric.
struct Gramian {
  Eigen::MatrixXf g;

  static Gramian zeros(std::uint32_t dim) { return {Eigen::MatrixXf::Zero(dim, dim)}; }
  std::uint32_t dim() const { return static_cast<std::uint32_t>(g.rows()); }
};

// Accumulated in double, rounded to f32 once.
Gramian local_gramian(const RowMatrixF& table);

// Normal equations of one target row: lhs w = rhs.
struct NormalEq {
  std::uint32_t row = 0;
  Eigen::MatrixXf lhs;
  Eigen::VectorXf rhs;
  std::uint64_t num_observations = 0;
};

// Observed-entry statistics only: lhs = sum h h^T, rhs = sum y h, merged over
// the dense rows of each source row. `embeddings` is num_slots x d, row-major,
// zero at padded slots. One result per source row, in batch order.
std::vector<NormalEq> accumulate_observed(const DenseBatch& batch, std::span<const float> embeddings,
                                          std::uint32_t dim);

// lhs += alpha G + lambda I.
void add_prior(NormalEq& eq, const Gramian& gramian, const HyperParams& hp);

// accumulate_observed followed by add_prior.
std::vector<NormalEq> accumulate_stats(const DenseBatch& batch, std::span<const float> embeddings,
                                       const Gramian& gramian, const HyperParams& hp);

using Preconditioner = std::function<void(const Eigen::VectorXf& residual, Eigen::VectorXf& out)>;

// Diagonal (Jacobi) preconditioner for use with solve_cg.
Preconditioner jacobi_preconditioner(const Eigen::MatrixXf& lhs);

struct CgResult {
  Eigen::VectorXf x;
  std::uint32_t iterations = 0;
  double residual_norm = 0.0;  // of the recurrence residual
};

// Conjugate gradients from x0 = 0. Stops after `max_iters` iterations or once
// ||r|| <= tol * ||rhs||. Throws NumericalError on breakdown (p^T A p <= 0).
CgResult solve_cg(const Eigen::MatrixXf& lhs, const Eigen::VectorXf& rhs, std::uint32_t max_iters,
                  double tol, const Preconditioner& preconditioner = nullptr);

// Solves lhs x = rhs with a direct backend or CG. `row` only labels errors.
Eigen::VectorXf solve_system(const Eigen::MatrixXf& lhs, const Eigen::VectorXf& rhs, Solver backend,
                             const HyperParams& hp, std::uint32_t row = 0);

// Applies the precision policy around solve_system: under kBf16All the
// statistics are rounded to bf16 first; whenever tables are bf16 the solution
// is rounded back to bf16.
Eigen::VectorXf solve(const NormalEq& eq, Solver backend, const HyperParams& hp);

// Well-conditioned SPD matrix B^T B / (2d) + 0.1 I with Gaussian B (2d x d).
Eigen::MatrixXf make_random_spd(std::uint32_t dim, std::uint64_t seed);

struct BenchRow {
  Solver backend = Solver::kCholesky;
  std::uint32_t dim = 0;
  std::uint32_t trials = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
};

// Times each backend solving `batch` random SPD systems per trial.
std::vector<BenchRow> bench_solvers(std::span<const std::uint32_t> dims, std::uint32_t trials,
                                    std::uint64_t seed, std::uint32_t batch = 256);

// backend,d,trials,mean_seconds,stddev_seconds
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace alsx

#endif  // ALSX_SOLVERS_HPP_
