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

#include "alsx/dense_batch.hpp"

#include <unordered_set>

#include <fmt/format.h>

#include "alsx/error.hpp"

namespace alsx {

DenseBatch densify(const SparseMatrix& m, std::span<const std::uint32_t> rows, std::uint32_t row_len) {
  if (row_len < 1) throw ConfigError("dense row length must be >= 1");
  DenseBatch batch;
  batch.row_len = row_len;
  batch.pad_id = static_cast<std::uint32_t>(m.num_cols());
  batch.source_rows.assign(rows.begin(), rows.end());

  std::uint64_t total = 0;
  std::unordered_set<std::uint32_t> seen;
  for (auto r : rows) {
    if (r >= m.num_rows()) throw CodecError(fmt::format("row {} out of range", r));
    if (!seen.insert(r).second) throw CodecError(fmt::format("row {} listed twice", r));
    total += dense_rows_for(m.row_len(r), row_len);
  }
  batch.ids.assign(total * row_len, batch.pad_id);
  batch.vals.assign(total * row_len, 0.0f);
  batch.mask.assign(total * row_len, 0);
  batch.row_map.reserve(total);

  std::size_t slot = 0;
  for (std::uint32_t s = 0; s < rows.size(); ++s) {
    const auto cols = m.row_cols(rows[s]);
    const auto vals = m.row_values(rows[s]);
    const auto dense = dense_rows_for(cols.size(), row_len);
    for (std::uint64_t d = 0; d < dense; ++d) batch.row_map.push_back(s);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      batch.ids[slot + k] = cols[k];
      batch.vals[slot + k] = vals[k];
      batch.mask[slot + k] = 1;
    }
    slot += dense * row_len;
  }
  return batch;
}

void pad_dense_rows(DenseBatch& batch, std::size_t dense_rows) {
  if (batch.num_dense_rows() > dense_rows) {
    throw CodecError(fmt::format("batch has {} dense rows, cannot pad to {}", batch.num_dense_rows(),
                                 dense_rows));
  }
  const std::size_t slots = dense_rows * batch.row_len;
  batch.ids.resize(slots, batch.pad_id);
  batch.vals.resize(slots, 0.0f);
  batch.mask.resize(slots, 0);
  batch.row_map.resize(dense_rows, kPaddingRow);
}

std::vector<SparseRow> undensify(const DenseBatch& batch) {
  const std::size_t L = batch.row_len;
  const std::size_t R = batch.num_dense_rows();
  if (L < 1) throw CodecError("dense row length is zero");
  if (batch.ids.size() != R * L || batch.vals.size() != R * L || batch.mask.size() != R * L) {
    throw CodecError("ids/vals/mask sizes do not match row_map * row_len");
  }
  std::vector<SparseRow> out(batch.source_rows.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s].row = batch.source_rows[s];

  bool in_padding = false;
  std::uint32_t prev = 0;
  bool prev_partial = false;
  for (std::size_t r = 0; r < R; ++r) {
    const auto src = batch.row_map[r];
    if (src == kPaddingRow) {
      in_padding = true;
    } else {
      if (in_padding) throw CodecError(fmt::format("dense row {} follows padding rows", r));
      if (src >= out.size()) throw CodecError(fmt::format("dense row {} maps to unknown source {}", r, src));
      if (r > 0 && src < prev) throw CodecError(fmt::format("row_map decreases at dense row {}", r));
      if (r > 0 && src == prev && prev_partial) {
        throw CodecError(fmt::format("partially masked dense row {} is not last of its source row", r - 1));
      }
    }
    bool seen_pad = false;
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t i = r * L + k;
      const bool masked = batch.mask[i] == 0;
      if (masked != (batch.ids[i] == batch.pad_id)) {
        throw CodecError(fmt::format("slot ({},{}) has mask {} but id {}", r, k, batch.mask[i], batch.ids[i]));
      }
      if (masked) {
        seen_pad = true;
        continue;
      }
      if (seen_pad || src == kPaddingRow) {
        throw CodecError(fmt::format("valid slot ({},{}) after padding", r, k));
      }
      out[src].entries.emplace_back(batch.ids[i], batch.vals[i]);
    }
    if (src != kPaddingRow) {
      if (seen_pad && batch.mask[r * L] == 0) {
        throw CodecError(fmt::format("dense row {} of source {} is fully masked", r, src));
      }
      prev = src;
      prev_partial = seen_pad;
    }
  }
  return out;
}

std::uint64_t wasted_slots(const SparseMatrix& m, std::span<const std::uint32_t> rows,
                           std::uint32_t row_len) {
  std::uint64_t wasted = 0;
  for (auto r : rows) {
    const auto len = m.row_len(r);
    wasted += row_len * dense_rows_for(len, row_len) - len;
  }
  return wasted;
}

}  // namespace alsx
