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

#include "alsx/solvers.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <fmt/format.h>

#include "alsx/bf16.hpp"
#include "alsx/error.hpp"
#include "alsx/rng.hpp"

namespace alsx {

Gramian local_gramian(const RowMatrixF& table) {
  const auto d = table.cols();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  // Blocked conversion keeps the f64 temporary small.
  constexpr Eigen::Index kBlock = 1024;
  for (Eigen::Index start = 0; start < table.rows(); start += kBlock) {
    const auto n = std::min(kBlock, table.rows() - start);
    const Eigen::MatrixXd block = table.middleRows(start, n).cast<double>();
    acc.selfadjointView<Eigen::Upper>().rankUpdate(block.transpose());
  }
  Gramian out{acc.cast<float>()};
  out.g.triangularView<Eigen::StrictlyLower>() = out.g.transpose();
  return out;
}

std::vector<NormalEq> accumulate_observed(const DenseBatch& batch, std::span<const float> embeddings,
                                          std::uint32_t dim) {
  const std::size_t L = batch.row_len;
  if (embeddings.size() != batch.num_slots() * dim) {
    throw ConfigError(fmt::format("embedding buffer has {} floats, expected {} slots x d={}",
                                  embeddings.size(), batch.num_slots(), dim));
  }
  std::vector<NormalEq> eqs(batch.source_rows.size());
  for (std::size_t s = 0; s < eqs.size(); ++s) {
    eqs[s].row = batch.source_rows[s];
    eqs[s].lhs = Eigen::MatrixXf::Zero(dim, dim);
    eqs[s].rhs = Eigen::VectorXf::Zero(dim);
  }
  using ConstRowMap = Eigen::Map<const RowMatrixF>;
  for (std::size_t r = 0; r < batch.num_dense_rows(); ++r) {
    const auto src = batch.row_map[r];
    if (src == kPaddingRow) continue;
    auto& eq = eqs[src];
    // Padded slots carry zero embeddings and contribute nothing.
    ConstRowMap block(embeddings.data() + r * L * dim, static_cast<Eigen::Index>(L), dim);
    Eigen::Map<const Eigen::VectorXf> y(batch.vals.data() + r * L, static_cast<Eigen::Index>(L));
    eq.lhs.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    eq.rhs.noalias() += block.transpose() * y;
    for (std::size_t k = 0; k < L; ++k) eq.num_observations += batch.mask[r * L + k];
  }
  for (auto& eq : eqs) eq.lhs.triangularView<Eigen::StrictlyUpper>() = eq.lhs.transpose();
  return eqs;
}

void add_prior(NormalEq& eq, const Gramian& gramian, const HyperParams& hp) {
  if (gramian.dim() != eq.lhs.rows()) {
    throw ConfigError(fmt::format("Gramian is {}x{}, normal equation is {}x{}", gramian.dim(),
                                  gramian.dim(), eq.lhs.rows(), eq.lhs.cols()));
  }
  eq.lhs.noalias() += static_cast<float>(hp.alpha) * gramian.g;
  eq.lhs.diagonal().array() += static_cast<float>(hp.lambda);
}

std::vector<NormalEq> accumulate_stats(const DenseBatch& batch, std::span<const float> embeddings,
                                       const Gramian& gramian, const HyperParams& hp) {
  auto eqs = accumulate_observed(batch, embeddings, gramian.dim());
  for (auto& eq : eqs) add_prior(eq, gramian, hp);
  return eqs;
}

Preconditioner jacobi_preconditioner(const Eigen::MatrixXf& lhs) {
  Eigen::VectorXf inv = lhs.diagonal().cwiseInverse();
  return [inv = std::move(inv)](const Eigen::VectorXf& r, Eigen::VectorXf& out) {
    out = inv.cwiseProduct(r);
  };
}

CgResult solve_cg(const Eigen::MatrixXf& lhs, const Eigen::VectorXf& rhs, std::uint32_t max_iters,
                  double tol, const Preconditioner& preconditioner) {
  const auto d = rhs.size();
  CgResult result{Eigen::VectorXf::Zero(d), 0, 0.0};
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return result;

  Eigen::VectorXf r = rhs;
  Eigen::VectorXf z = r;
  if (preconditioner) preconditioner(r, z);
  Eigen::VectorXf p = z;
  Eigen::VectorXf ap(d);
  double rz = r.dot(z);
  result.residual_norm = rhs_norm;
  for (std::uint32_t k = 0; k < max_iters; ++k) {
    ap.noalias() = lhs * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw NumericalError(fmt::format("CG breakdown at iteration {}: p^T A p = {}", k, pap));
    }
    const auto step = static_cast<float>(rz / pap);
    result.x += step * p;
    r -= step * ap;
    result.iterations = k + 1;
    result.residual_norm = r.norm();
    if (result.residual_norm <= tol * rhs_norm) break;
    if (preconditioner) {
      preconditioner(r, z);
    } else {
      z = r;
    }
    const double rz_next = r.dot(z);
    p = z + static_cast<float>(rz_next / rz) * p;
    rz = rz_next;
  }
  return result;
}

Eigen::VectorXf solve_system(const Eigen::MatrixXf& lhs, const Eigen::VectorXf& rhs, Solver backend,
                             const HyperParams& hp, std::uint32_t row) {
  if (lhs.rows() != lhs.cols() || lhs.rows() != rhs.size()) {
    throw ConfigError(fmt::format("row {}: system shape {}x{} vs rhs {}", row, lhs.rows(), lhs.cols(),
                                  rhs.size()));
  }
  if (!lhs.allFinite() || !rhs.allFinite()) {
    throw NumericalError(fmt::format("row {}: non-finite entries in normal equations", row));
  }
  Eigen::VectorXf x;
  switch (backend) {
    case Solver::kCholesky: {
      Eigen::LLT<Eigen::MatrixXf> llt(lhs);
      if (llt.info() != Eigen::Success) {
        throw NumericalError(fmt::format("row {}: Cholesky failed, matrix is not positive definite", row));
      }
      x = llt.solve(rhs);
      break;
    }
    case Solver::kLu:
      x = Eigen::PartialPivLU<Eigen::MatrixXf>(lhs).solve(rhs);
      break;
    case Solver::kQr:
      x = Eigen::HouseholderQR<Eigen::MatrixXf>(lhs).solve(rhs);
      break;
    case Solver::kCg:
      try {
        x = solve_cg(lhs, rhs, hp.effective_cg_iters(), hp.cg_tol).x;
      } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("row {}: {}", row, e.what()));
      }
      break;
  }
  if (!x.allFinite()) throw NumericalError(fmt::format("row {}: solution is not finite", row));
  return x;
}

Eigen::VectorXf solve(const NormalEq& eq, Solver backend, const HyperParams& hp) {
  Eigen::VectorXf x;
  if (hp.precision == Precision::kBf16All) {
    Eigen::MatrixXf lhs = eq.lhs.unaryExpr([](float v) { return round_to_bf16(v); });
    Eigen::VectorXf rhs = eq.rhs.unaryExpr([](float v) { return round_to_bf16(v); });
    x = solve_system(lhs, rhs, backend, hp, eq.row);
  } else {
    x = solve_system(eq.lhs, eq.rhs, backend, hp, eq.row);
  }
  if (hp.bf16_tables()) x = x.unaryExpr([](float v) { return round_to_bf16(v); });
  return x;
}

Eigen::MatrixXf make_random_spd(std::uint32_t dim, std::uint64_t seed) {
  const Eigen::Index d = dim;
  Eigen::MatrixXd b(2 * d, d);
  CounterRng rng(hash_combine(seed, 0x5bd1e995));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < 2 * d; ++i) b(i, j) = rng.normal();
  }
  Eigen::MatrixXd a = b.transpose() * b / static_cast<double>(2 * d);
  a.diagonal().array() += 0.1;
  Eigen::MatrixXf out = a.cast<float>();
  out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  return out;
}

std::vector<BenchRow> bench_solvers(std::span<const std::uint32_t> dims, std::uint32_t trials,
                                    std::uint64_t seed, std::uint32_t batch) {
  std::vector<BenchRow> rows;
  for (auto d : dims) {
    if (d == 0) throw ConfigError("bench dimension must be >= 1");
    std::vector<Eigen::MatrixXf> systems;
    std::vector<Eigen::VectorXf> rhs;
    CounterRng rng(hash_combine(seed, d));
    for (std::uint32_t i = 0; i < batch; ++i) {
      systems.push_back(make_random_spd(d, hash_combine(seed, hash_combine(d, i))));
      Eigen::VectorXf b(d);
      for (std::uint32_t j = 0; j < d; ++j) b[j] = static_cast<float>(rng.normal());
      rhs.push_back(std::move(b));
    }
    HyperParams hp;
    hp.dim = d;
    for (Solver backend : {Solver::kLu, Solver::kQr, Solver::kCholesky, Solver::kCg}) {
      std::vector<double> times;
      float sink = 0.0f;
      for (std::uint32_t t = 0; t < trials; ++t) {
        const auto start = std::chrono::steady_clock::now();
        for (std::uint32_t i = 0; i < batch; ++i) sink += solve_system(systems[i], rhs[i], backend, hp)[0];
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
      double mean = 0.0, var = 0.0;
      for (double t : times) mean += t;
      mean /= std::max<std::size_t>(times.size(), 1);
      for (double t : times) var += (t - mean) * (t - mean);
      var /= std::max<std::size_t>(times.size() > 1 ? times.size() - 1 : 1, 1);
      asm volatile("" : : "r"(&sink) : "memory");
      rows.push_back({backend, d, trials, mean, std::sqrt(var)});
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "backend,d,trials,mean_seconds,stddev_seconds\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.9g},{:.9g}\n", to_string(r.backend), r.dim, r.trials, r.mean_seconds,
                       r.stddev_seconds);
  }
}

}  // namespace alsx
