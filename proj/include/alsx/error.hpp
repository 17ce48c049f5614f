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

#ifndef ALSX_ERROR_HPP_
#define ALSX_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace alsx {

// Root of all library errors. The CLI maps each subclass to a stable exit
// code (see ExitCode).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters or flag values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (edge lists, checkpoints, CSR).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, factorization failures, CG breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch across workers, timeouts, cancelled groups.
class CollectiveError : public Error {
 public:
  using Error::Error;
};

// DenseBatch that cannot be decoded.
class CodecError : public Error {
 public:
  using Error::Error;
};

enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

}  // namespace alsx

#endif  // ALSX_ERROR_HPP_
