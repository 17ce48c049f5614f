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

#include "alsx/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "alsx/error.hpp"
#include "alsx/io.hpp"

namespace alsx {

void write_table(std::ostream& out, const RowMatrixF& table, Precision precision) {
  out.write(kTableMagic, sizeof(kTableMagic));
  io::put_le<std::uint32_t>(out, kTableVersion);
  io::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(table.rows()));
  io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.cols()));
  io::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(precision));
  io::put_le_array<float>(out, std::span<const float>(table.data(), static_cast<std::size_t>(table.size())));
}

RowMatrixF read_table(std::istream& in, Precision* precision) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kTableMagic, sizeof(magic)) != 0) {
    throw DataError("not an ALSX table (bad magic)");
  }
  const auto version = io::get_le<std::uint32_t>(in);
  if (version != kTableVersion) throw DataError(fmt::format("unsupported table version {}", version));
  const auto rows = io::get_le<std::uint64_t>(in);
  const auto dim = io::get_le<std::uint32_t>(in);
  const auto prec = io::get_le<std::uint8_t>(in);
  if (prec > static_cast<std::uint8_t>(Precision::kBf16All)) {
    throw DataError(fmt::format("unknown precision tag {}", prec));
  }
  if (dim == 0 || rows > static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max()) / dim) {
    throw DataError(fmt::format("implausible table shape {}x{}", rows, dim));
  }
  RowMatrixF table(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  io::get_le_array<float>(in, std::span<float>(table.data(), static_cast<std::size_t>(table.size())));
  if (precision != nullptr) *precision = static_cast<Precision>(prec);
  return table;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::atomic_write(path, [&](std::ostream& out) {
    write_table(out, ckpt.users, ckpt.precision);
    write_table(out, ckpt.items, ckpt.precision);
  });
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open checkpoint {}", path.string()));
  Checkpoint ckpt;
  Precision item_precision{};
  ckpt.users = read_table(in, &ckpt.precision);
  ckpt.items = read_table(in, &item_precision);
  if (item_precision != ckpt.precision || ckpt.users.cols() != ckpt.items.cols()) {
    throw DataError(fmt::format("checkpoint {} has inconsistent tables", path.string()));
  }
  return ckpt;
}

}  // namespace alsx
