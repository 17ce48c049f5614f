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

#ifndef ALSX_CLI_HPP_
#define ALSX_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "alsx/error.hpp"
#include "alsx/hyperparams.hpp"

namespace alsx::cli {

enum class Command { kTrain, kEval, kSplit, kSynth, kBenchSolvers };

// Bad command line; maps to exit code 2. `help` holds the usage text.
class UsageError : public ConfigError {
 public:
  UsageError(const std::string& what, std::string help) : ConfigError(what), help_(std::move(help)) {}
  const std::string& help() const { return help_; }

 private:
  std::string help_;
};

struct RunConfig {
  Command command = Command::kTrain;
  HyperParams hp;
  bool precision_set = false;  // eval: otherwise taken from the checkpoint

  std::string data;
  std::string out;
  std::string log;  // metrics destination, stdout when empty

  // train
  std::vector<double> grid_lambda;
  std::vector<double> grid_alpha;
  std::string eval_split;  // optional split prefix evaluated after training

  // eval
  std::string checkpoint;
  std::string split_prefix;
  std::string inputs;
  std::string truth;
  std::string train_data;
  std::string dump;
  std::vector<std::uint32_t> ks = {20, 50};

  // split
  double row_frac = 0.9;
  double holdout_frac = 0.25;

  // synth
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint32_t rank = 8;
  std::uint32_t nnz_per_row = 20;
  bool binary = false;

  // bench-solvers
  std::vector<std::uint32_t> dims = {32, 64, 128, 256};
  std::uint32_t trials = 5;
  std::uint32_t bench_batch = 256;
};

// Precedence: flags > --config key=value file > defaults. Returns nullopt
// after printing help to `out` when --help was requested. Throws UsageError.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

// Executes a parsed command. Errors propagate as alsx::Error subclasses.
void run(const RunConfig& config, std::ostream& out);

// parse_args + run with error reporting on `err`; returns the process exit
// code (0 ok, 2 usage, 3 data, 4 numerical, 1 anything else).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alsx::cli

#endif  // ALSX_CLI_HPP_
