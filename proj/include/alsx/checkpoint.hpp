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

#ifndef ALSX_CHECKPOINT_HPP_
#define ALSX_CHECKPOINT_HPP_

#include <filesystem>
#include <istream>
#include <ostream>

#include "alsx/embedding.hpp"
#include "alsx/hyperparams.hpp"

namespace alsx {

// Table layout, all little-endian:
//   char[4] "ALSX" | u32 version | u64 num_rows | u32 d | u8 precision |
//   num_rows * d f32, row-major
// A checkpoint file is the user table followed by the item table.
inline constexpr char kTableMagic[4] = {'A', 'L', 'S', 'X'};
inline constexpr std::uint32_t kTableVersion = 1;

struct Checkpoint {
  RowMatrixF users;
  RowMatrixF items;
  Precision precision = Precision::kF32;
};

void write_table(std::ostream& out, const RowMatrixF& table, Precision precision);
RowMatrixF read_table(std::istream& in, Precision* precision = nullptr);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace alsx

#endif  // ALSX_CHECKPOINT_HPP_
