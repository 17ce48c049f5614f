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

#include "alsx/sparse_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "alsx/error.hpp"
#include "alsx/io.hpp"

namespace alsx {

namespace {

constexpr char kCsrMagic[4] = {'A', 'L', 'S', 'C'};
// Ids must leave room for the padding sentinel (== dimension) in a u32.
constexpr std::uint64_t kMaxDim = std::numeric_limits<std::uint32_t>::max();

}  // namespace

SparseMatrix::SparseMatrix(std::uint64_t num_rows, std::uint64_t num_cols,
                           std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> col_idx,
                           std::vector<float> values)
    : num_rows_(num_rows),
      num_cols_(num_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  validate();
}

SparseMatrix SparseMatrix::from_triplets(std::uint64_t num_rows, std::uint64_t num_cols,
                                         std::vector<Triplet> entries) {
  if (num_rows > kMaxDim || num_cols > kMaxDim) {
    throw DataError(fmt::format("matrix shape {}x{} exceeds the 32-bit id space", num_rows, num_cols));
  }
  for (const auto& t : entries) {
    if (t.row >= num_rows || t.col >= num_cols) {
      throw DataError(fmt::format("entry ({},{}) outside {}x{} matrix", t.row, t.col, num_rows, num_cols));
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // Keep the last of each run of equal (row, col); stable_sort preserved input order.
  std::vector<Triplet> unique;
  unique.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i + 1 < entries.size() && entries[i + 1].row == entries[i].row &&
        entries[i + 1].col == entries[i].col) {
      continue;
    }
    unique.push_back(entries[i]);
  }
  std::vector<std::uint64_t> row_ptr(num_rows + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<float> vals;
  cols.reserve(unique.size());
  vals.reserve(unique.size());
  for (const auto& t : unique) {
    ++row_ptr[t.row + 1];
    cols.push_back(t.col);
    vals.push_back(t.value);
  }
  for (std::uint64_t r = 0; r < num_rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return SparseMatrix(num_rows, num_cols, std::move(row_ptr), std::move(cols), std::move(vals));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::uint64_t r = 0; r < num_rows_; ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({static_cast<std::uint32_t>(r), col_idx_[k], values_[k]});
    }
  }
  return out;
}

void SparseMatrix::validate() const {
  if (num_rows_ > kMaxDim || num_cols_ > kMaxDim) {
    throw DataError(fmt::format("matrix shape {}x{} exceeds the 32-bit id space", num_rows_, num_cols_));
  }
  if (row_ptr_.size() != num_rows_ + 1) {
    throw DataError(fmt::format("row_ptr has {} entries, expected {}", row_ptr_.size(), num_rows_ + 1));
  }
  if (row_ptr_.front() != 0) throw DataError("row_ptr[0] != 0");
  if (row_ptr_.back() != col_idx_.size()) throw DataError("row_ptr[last] != nnz");
  if (values_.size() != col_idx_.size()) throw DataError("values and col_idx differ in length");
  for (std::uint64_t r = 0; r < num_rows_; ++r) {
    if (row_ptr_[r + 1] < row_ptr_[r]) throw DataError(fmt::format("row_ptr decreases at row {}", r));
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= num_cols_) {
        throw DataError(fmt::format("column {} out of range in row {}", col_idx_[k], r));
      }
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1]) {
        throw DataError(fmt::format("columns not strictly increasing in row {}", r));
      }
    }
  }
}

SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<std::uint64_t> row_ptr(m.num_cols() + 1, 0);
  for (auto c : m.col_idx()) ++row_ptr[c + 1];
  for (std::uint64_t c = 0; c < m.num_cols(); ++c) row_ptr[c + 1] += row_ptr[c];
  std::vector<std::uint32_t> cols(m.nnz());
  std::vector<float> vals(m.nnz());
  std::vector<std::uint64_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
  // Row-major traversal keeps each output row sorted.
  for (std::uint64_t r = 0; r < m.num_rows(); ++r) {
    const auto rc = m.row_cols(r);
    const auto rv = m.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const auto pos = cursor[rc[k]]++;
      cols[pos] = static_cast<std::uint32_t>(r);
      vals[pos] = rv[k];
    }
  }
  return SparseMatrix(m.num_cols(), m.num_rows(), std::move(row_ptr), std::move(cols), std::move(vals));
}

std::vector<std::uint64_t> column_degrees(const SparseMatrix& m) {
  std::vector<std::uint64_t> deg(m.num_cols(), 0);
  for (auto c : m.col_idx()) ++deg[c];
  return deg;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_id(std::string_view field, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec == std::errc::result_out_of_range || (ec == std::errc() && v >= kMaxDim)) {
    throw DataError(fmt::format("line {}: {} id '{}' overflows the 32-bit id space", line_no, what, field));
  }
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(fmt::format("line {}: malformed {} id '{}'", line_no, what, field));
  }
  return v;
}

float parse_value(std::string_view field, std::size_t line_no) {
  float v = 0.0f;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(fmt::format("line {}: malformed value '{}'", line_no, field));
  }
  return v;
}

}  // namespace

SparseMatrix load_edge_list(const std::filesystem::path& path, float default_value) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::vector<Triplet> entries;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> dims;
  std::uint64_t max_row = 0, max_col = 0;
  bool any = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (view.starts_with("#dims")) {
        std::string_view rest = view.substr(5);
        auto trim = [](std::string_view s) {
          while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
          return s;
        };
        rest = trim(rest);
        const auto sep = rest.find_first_of(" \t");
        if (sep == std::string_view::npos) {
          throw DataError(fmt::format("line {}: malformed #dims header", line_no));
        }
        const auto m = parse_id(rest.substr(0, sep), line_no, "row count");
        const auto n = parse_id(trim(rest.substr(sep)), line_no, "column count");
        dims = {m, n};
      }
      continue;
    }
    const auto fields = split_tabs(view);
    if (fields.size() < 2 || fields.size() > 3) {
      throw DataError(fmt::format("line {}: expected 2 or 3 tab-separated fields, got {}", line_no,
                                  fields.size()));
    }
    const auto src = parse_id(fields[0], line_no, "source");
    const auto dst = parse_id(fields[1], line_no, "destination");
    const float value = fields.size() == 3 ? parse_value(fields[2], line_no) : default_value;
    entries.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), value});
    max_row = std::max(max_row, src);
    max_col = std::max(max_col, dst);
    any = true;
  }
  std::uint64_t rows = any ? max_row + 1 : 0;
  std::uint64_t cols = any ? max_col + 1 : 0;
  if (dims) {
    if (dims->first < rows || dims->second < cols) {
      throw DataError(fmt::format("{}: #dims {}x{} too small for ids up to ({},{})", path.string(),
                                  dims->first, dims->second, max_row, max_col));
    }
    rows = dims->first;
    cols = dims->second;
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(entries));
}

void save_edge_list(const std::filesystem::path& path, const SparseMatrix& m) {
  io::atomic_write(
      path,
      [&](std::ostream& out) {
        out << "#dims " << m.num_rows() << ' ' << m.num_cols() << '\n';
        for (std::uint64_t r = 0; r < m.num_rows(); ++r) {
          const auto cols = m.row_cols(r);
          const auto vals = m.row_values(r);
          for (std::size_t k = 0; k < cols.size(); ++k) {
            // Shortest round-trip representation keeps reloads bit-exact.
            out << fmt::format("{}\t{}\t{}\n", r, cols[k], vals[k]);
          }
        }
      },
      /*binary=*/false);
}

void save_binary_csr(const std::filesystem::path& path, const SparseMatrix& m) {
  io::atomic_write(path, [&](std::ostream& out) {
    out.write(kCsrMagic, sizeof(kCsrMagic));
    io::put_le<std::uint64_t>(out, m.num_rows());
    io::put_le<std::uint64_t>(out, m.num_cols());
    io::put_le<std::uint64_t>(out, m.nnz());
    io::put_le_array(out, m.row_ptr());
    io::put_le_array(out, m.col_idx());
    io::put_le_array(out, m.values());
  });
}

SparseMatrix load_binary_csr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCsrMagic, 4) != 0) {
    throw DataError(fmt::format("{}: not a binary CSR file", path.string()));
  }
  const auto rows = io::get_le<std::uint64_t>(in);
  const auto cols = io::get_le<std::uint64_t>(in);
  const auto nnz = io::get_le<std::uint64_t>(in);
  if (rows > kMaxDim || cols > kMaxDim || nnz > (std::uint64_t{1} << 40)) {
    throw DataError(fmt::format("{}: implausible header", path.string()));
  }
  std::vector<std::uint64_t> row_ptr(rows + 1);
  std::vector<std::uint32_t> col_idx(nnz);
  std::vector<float> values(nnz);
  io::get_le_array<std::uint64_t>(in, row_ptr);
  io::get_le_array<std::uint32_t>(in, col_idx);
  io::get_le_array<float>(in, values);
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix load_matrix(const std::filesystem::path& path, float default_value) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kCsrMagic, 4) == 0) return load_binary_csr(path);
  return load_edge_list(path, default_value);
}

}  // namespace alsx
