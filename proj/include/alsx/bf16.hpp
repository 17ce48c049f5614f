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

#ifndef ALSX_BF16_HPP_
#define ALSX_BF16_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>

namespace alsx {

// bfloat16 emulated on f32 storage words: 8 exponent bits, 7 stored mantissa
// bits. Values are kept as float but only the upper 16 bits are ever set.

// Round-to-nearest-even truncation of the low 16 bits. NaN stays NaN (quiet);
// values beyond the largest finite bf16 round to infinity.
inline std::uint16_t float_to_bf16_bits(float x) {
  const auto bits = std::bit_cast<std::uint32_t>(x);
  if (std::isnan(x)) {
    return static_cast<std::uint16_t>((bits >> 16) | 0x0040u);
  }
  const std::uint32_t lsb = (bits >> 16) & 1u;
  return static_cast<std::uint16_t>((bits + 0x7FFFu + lsb) >> 16);
}

inline float bf16_bits_to_float(std::uint16_t b) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(b) << 16);
}

inline float round_to_bf16(float x) { return bf16_bits_to_float(float_to_bf16_bits(x)); }

inline bool is_bf16_representable(float x) {
  return std::isnan(x) || (std::bit_cast<std::uint32_t>(x) & 0xFFFFu) == 0;
}

inline void round_to_bf16(std::span<float> values) {
  for (float& v : values) v = round_to_bf16(v);
}

}  // namespace alsx

#endif  // ALSX_BF16_HPP_
