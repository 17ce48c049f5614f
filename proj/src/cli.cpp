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

#include "alsx/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "alsx/checkpoint.hpp"
#include "alsx/datasets.hpp"
#include "alsx/eval.hpp"
#include "alsx/io.hpp"
#include "alsx/solvers.hpp"
#include "alsx/sparse_matrix.hpp"
#include "alsx/trainer.hpp"

namespace alsx::cli {

namespace {

struct EnumFlags {
  std::string solver;
  std::string precision;
  std::string stats_mode;
};

void add_solve_flags(CLI::App& sub, RunConfig& cfg, EnumFlags& enums) {
  sub.add_option("--lambda", cfg.hp.lambda, "L2 penalty");
  sub.add_option("--alpha", cfg.hp.alpha, "weight of the unobserved pairs");
  sub.add_option("--solver", enums.solver, "cholesky | lu | qr | cg");
  sub.add_option("--cg-iters", cfg.hp.cg_iters, "CG iteration cap (0: d)");
  sub.add_option("--cg-tol", cfg.hp.cg_tol, "CG relative residual tolerance");
  sub.add_option("--dense-row-len", cfg.hp.dense_row_len, "dense batch row length L");
  sub.add_option("--precision", enums.precision, "f32 | bf16_storage | bf16_all");
}

void add_train_flags(CLI::App& sub, RunConfig& cfg, EnumFlags& enums) {
  add_solve_flags(sub, cfg, enums);
  sub.add_option("--d", cfg.hp.dim, "embedding dimension");
  sub.add_option("--epochs", cfg.hp.epochs, "number of epochs");
  sub.add_option("--batch-rows", cfg.hp.batch_rows, "dense rows per batch and worker (R)");
  sub.add_option("--shards", cfg.hp.num_shards, "number of SPMD workers (M)");
  sub.add_option("--stats-mode", enums.stats_mode, "embedding_gather | stats_reduce");
  sub.add_option("--seed", cfg.hp.seed, "initialization seed");
}

std::string join_path(const std::string& prefix, const char* suffix) { return prefix + suffix; }

void write_json_line(std::ostream& out, const nlohmann::json& j) { out << j.dump() << '\n' << std::flush; }

EvalSplit load_eval_split(const RunConfig& cfg) {
  const std::string inputs = cfg.split_prefix.empty() ? cfg.inputs : join_path(cfg.split_prefix, ".inputs");
  const std::string truth = cfg.split_prefix.empty() ? cfg.truth : join_path(cfg.split_prefix, ".truth");
  std::string train = cfg.train_data;
  if (train.empty() && !cfg.split_prefix.empty() &&
      std::filesystem::exists(join_path(cfg.split_prefix, ".train"))) {
    train = join_path(cfg.split_prefix, ".train");
  }
  EvalSplit split;
  split.test_inputs = load_matrix(inputs);
  split.test_truth = load_matrix(truth);
  if (split.test_inputs.num_rows() != split.test_truth.num_rows() ||
      split.test_inputs.num_cols() != split.test_truth.num_cols()) {
    throw DataError("inputs and truth matrices differ in shape");
  }
  split.train = train.empty()
                    ? SparseMatrix::from_triplets(split.test_inputs.num_rows(), split.test_inputs.num_cols(), {})
                    : load_matrix(train);
  for (std::uint64_t r = 0; r < split.test_truth.num_rows(); ++r) {
    if (split.test_truth.row_len(r) > 0) split.test_rows.push_back(static_cast<std::uint32_t>(r));
  }
  return split;
}

EvalSplit load_split_prefix(const std::string& prefix) {
  EvalSplit split;
  split.train = load_matrix(join_path(prefix, ".train"));
  split.test_inputs = load_matrix(join_path(prefix, ".inputs"));
  split.test_truth = load_matrix(join_path(prefix, ".truth"));
  for (std::uint64_t r = 0; r < split.test_truth.num_rows(); ++r) {
    if (split.test_truth.row_len(r) > 0) split.test_rows.push_back(static_cast<std::uint32_t>(r));
  }
  return split;
}

void run_train(const RunConfig& cfg, std::ostream& out) {
  const SparseMatrix data = load_matrix(cfg.data);
  std::optional<EvalSplit> eval_split;
  if (!cfg.eval_split.empty()) eval_split = load_split_prefix(cfg.eval_split);

  const bool grid = !cfg.grid_lambda.empty() || !cfg.grid_alpha.empty();
  const std::vector<double> lambdas = cfg.grid_lambda.empty() ? std::vector{cfg.hp.lambda} : cfg.grid_lambda;
  const std::vector<double> alphas = cfg.grid_alpha.empty() ? std::vector{cfg.hp.alpha} : cfg.grid_alpha;

  for (double lambda : lambdas) {
    for (double alpha : alphas) {
      HyperParams hp = cfg.hp;
      hp.lambda = lambda;
      hp.alpha = alpha;
      hp.validate();
      std::string ckpt = cfg.out;
      std::string log = cfg.log;
      if (grid) {
        const auto tag = fmt::format(".lambda{}_alpha{}", lambda, alpha);
        ckpt = cfg.out + tag;
        log = (cfg.log.empty() ? cfg.out : cfg.log) + tag + ".jsonl";
      }
      std::ofstream log_file;
      if (!log.empty()) {
        log_file.open(log, std::ios::trunc);
        if (!log_file) throw DataError(fmt::format("cannot open metrics log {}", log));
      }
      std::ostream& metrics = log.empty() ? out : log_file;

      TrainOptions options;
      options.checkpoint = ckpt;
      options.on_half_pass = [&](const HalfPassMetrics& m) { write_json_line(metrics, m.to_json()); };
      spdlog::info("training lambda={} alpha={} d={} epochs={} shards={}", lambda, alpha, hp.dim, hp.epochs,
                   hp.num_shards);
      const TrainState state = train(data, hp, options);

      nlohmann::json summary = {{"lambda", lambda}, {"alpha", alpha}, {"checkpoint", ckpt}};
      summary["final_objective"] = state.log.empty() ? nlohmann::json(nullptr) : nlohmann::json(state.log.back().objective);
      if (eval_split) {
        const auto report = evaluate(*eval_split, concat_shards(state.items), hp, cfg.ks);
        summary["eval"] = report.to_json();
        if (!grid) write_json_line(metrics, {{"eval", report.to_json()}});
      }
      if (grid) write_json_line(out, summary);
    }
  }
}

void run_eval(const RunConfig& cfg, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  HyperParams hp = cfg.hp;
  hp.dim = static_cast<std::uint32_t>(ckpt.items.cols());
  if (!cfg.precision_set) hp.precision = ckpt.precision;
  hp.validate();
  const EvalSplit split = load_eval_split(cfg);
  if (split.test_inputs.num_cols() != static_cast<std::uint64_t>(ckpt.items.rows())) {
    throw DataError(fmt::format("checkpoint has {} items but the test data has {} columns", ckpt.items.rows(),
                                split.test_inputs.num_cols()));
  }
  std::vector<RowEval> rows;
  const auto report = evaluate(split, ckpt.items, hp, cfg.ks, cfg.dump.empty() ? nullptr : &rows);
  nlohmann::json j = report.to_json();
  if (split.train.nnz() > 0) j["popularity"] = evaluate_popularity(split, cfg.ks).to_json();
  if (!cfg.dump.empty()) {
    io::atomic_write(
        cfg.dump, [&](std::ostream& o) { write_row_dump(o, report.ks, rows); }, /*binary=*/false);
  }
  if (cfg.out.empty()) {
    write_json_line(out, j);
  } else {
    io::atomic_write(
        cfg.out, [&](std::ostream& o) { o << j.dump(2) << '\n'; }, /*binary=*/false);
  }
}

void run_split(const RunConfig& cfg, std::ostream& out) {
  const SparseMatrix data = load_matrix(cfg.data);
  const auto split = split_strong_generalization(data, {cfg.row_frac, cfg.holdout_frac, cfg.hp.seed});
  save_edge_list(join_path(cfg.out, ".train"), split.train);
  save_edge_list(join_path(cfg.out, ".inputs"), split.test_inputs);
  save_edge_list(join_path(cfg.out, ".truth"), split.test_truth);
  write_json_line(out, {{"train_nnz", split.train.nnz()},
                        {"test_rows", split.test_rows.size()},
                        {"inputs_nnz", split.test_inputs.nnz()},
                        {"truth_nnz", split.test_truth.nnz()}});
}

void run_synth(const RunConfig& cfg, std::ostream& out) {
  const auto m = synth_low_rank(cfg.rows, cfg.cols, cfg.rank, cfg.nnz_per_row, cfg.hp.seed);
  if (cfg.binary) {
    save_binary_csr(cfg.out, m);
  } else {
    save_edge_list(cfg.out, m);
  }
  write_json_line(out, {{"rows", m.num_rows()}, {"cols", m.num_cols()}, {"nnz", m.nnz()}});
}

void run_bench(const RunConfig& cfg, std::ostream& out) {
  const auto rows = bench_solvers(cfg.dims, cfg.trials, cfg.hp.seed, cfg.bench_batch);
  if (cfg.out.empty()) {
    write_bench_csv(out, rows);
  } else {
    io::atomic_write(
        cfg.out, [&](std::ostream& o) { write_bench_csv(o, rows); }, /*binary=*/false);
  }
}

// Keys at top level or under [<subcommand>] fill options the command line left
// unset; other sections are ignored so one file can serve several commands.
void apply_config_file(CLI::App& sub, const std::string& path, const std::string& help) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::ParseError& e) {
    throw UsageError(fmt::format("{}: {}", path, e.what()), help);
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name())) continue;
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError(fmt::format("{}: unknown key '{}'", path, item.name), help);
    }
    if (opt->count() > 0 || item.name == "config") continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError(fmt::format("{}: key '{}': {}", path, item.name, e.what()), help);
    }
  }
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::default_logger()->clone("alsx"));
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("ALSX_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  RunConfig cfg;
  EnumFlags enums;
  CLI::App app{"Sharded alternating least squares matrix factorization", "alsx"};
  app.require_subcommand(1);
  app.allow_extras(false);
  std::string config_file;

  auto* train = app.add_subcommand("train", "train a model on an edge list");
  train->add_option("--config", config_file, "INI file of flag defaults ([train] section or top level)")
      ->check(CLI::ExistingFile);
  train->add_option("--data", cfg.data, "training edge list (TSV or binary CSR), required");
  train->add_option("--out", cfg.out, "checkpoint path, required");
  train->add_option("--log", cfg.log, "metrics JSON lines (default: stdout)");
  add_train_flags(*train, cfg, enums);
  train->add_option("--grid-lambda", cfg.grid_lambda, "comma list of lambdas to sweep")->delimiter(',');
  train->add_option("--grid-alpha", cfg.grid_alpha, "comma list of alphas to sweep")->delimiter(',');
  train->add_option("--eval-split", cfg.eval_split, "split prefix to evaluate after training");
  train->add_option("--k", cfg.ks, "comma list of recall cutoffs")->delimiter(',');

  auto* eval = app.add_subcommand("eval", "strong-generalization Recall@K of a checkpoint");
  eval->add_option("--config", config_file, "INI file of flag defaults ([eval] section or top level)")
      ->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", cfg.checkpoint, "checkpoint written by train, required");
  eval->add_option("--split", cfg.split_prefix, "prefix of .inputs/.truth[/.train] files");
  eval->add_option("--inputs", cfg.inputs, "fold-in inputs edge list");
  eval->add_option("--truth", cfg.truth, "held-out truth edge list");
  eval->add_option("--train", cfg.train_data, "training edge list (enables the popularity baseline)");
  eval->add_option("--out", cfg.out, "report JSON path (default: stdout)");
  eval->add_option("--dump", cfg.dump, "per-row TSV dump");
  eval->add_option("--k", cfg.ks, "comma list of recall cutoffs")->delimiter(',');
  add_solve_flags(*eval, cfg, enums);

  auto* split = app.add_subcommand("split", "strong-generalization train/test split");
  split->add_option("--data", cfg.data, "edge list to split")->required();
  split->add_option("--out", cfg.out, "output prefix (.train/.inputs/.truth)")->required();
  split->add_option("--row-frac", cfg.row_frac, "fraction of rows kept for training");
  split->add_option("--holdout-frac", cfg.holdout_frac, "fraction of a test row held out");
  split->add_option("--seed", cfg.hp.seed, "split seed");

  auto* synth = app.add_subcommand("synth", "synthetic low-rank implicit matrix");
  synth->add_option("--rows", cfg.rows, "number of rows")->required();
  synth->add_option("--cols", cfg.cols, "number of columns")->required();
  synth->add_option("--rank", cfg.rank, "rank of the generating factors");
  synth->add_option("--nnz-per-row", cfg.nnz_per_row, "entries per row");
  synth->add_option("--seed", cfg.hp.seed, "generator seed");
  synth->add_option("--out", cfg.out, "output path")->required();
  synth->add_flag("--binary", cfg.binary, "write binary CSR instead of TSV");

  auto* bench = app.add_subcommand("bench-solvers", "time the linear solver backends");
  bench->add_option("--dims", cfg.dims, "comma list of dimensions")->delimiter(',');
  bench->add_option("--trials", cfg.trials, "timed repetitions per (backend, d)");
  bench->add_option("--batch", cfg.bench_batch, "systems solved per repetition");
  bench->add_option("--seed", cfg.hp.seed, "seed for the random systems");
  bench->add_option("--out", cfg.out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), app.help());
  }

  for (auto* sub : {train, eval}) {
    if (!config_file.empty() && sub->parsed()) apply_config_file(*sub, config_file, app.help());
  }

  if (train->parsed()) cfg.command = Command::kTrain;
  if (eval->parsed()) cfg.command = Command::kEval;
  if (split->parsed()) cfg.command = Command::kSplit;
  if (synth->parsed()) cfg.command = Command::kSynth;
  if (bench->parsed()) cfg.command = Command::kBenchSolvers;

  try {
    if (!enums.solver.empty()) cfg.hp.solver = parse_solver(enums.solver);
    if (!enums.precision.empty()) {
      cfg.hp.precision = parse_precision(enums.precision);
      cfg.precision_set = true;
    }
    if (!enums.stats_mode.empty()) cfg.hp.stats_mode = parse_stats_mode(enums.stats_mode);
    cfg.hp.validate();
    for (double l : cfg.grid_lambda) {
      if (!(l >= 0.0)) throw ConfigError(fmt::format("--grid-lambda: invalid value {}", l));
    }
    for (double a : cfg.grid_alpha) {
      if (!(a >= 0.0)) throw ConfigError(fmt::format("--grid-alpha: invalid value {}", a));
    }
    for (auto k : cfg.ks) {
      if (k == 0) throw ConfigError("--k: cutoffs must be >= 1");
    }
    if (cfg.command == Command::kTrain && (cfg.data.empty() || cfg.out.empty())) {
      throw ConfigError("train needs --data and --out");
    }
    if (cfg.command == Command::kEval && cfg.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
    if (cfg.command == Command::kEval && cfg.split_prefix.empty() && (cfg.inputs.empty() || cfg.truth.empty())) {
      throw ConfigError("eval needs --split or both --inputs and --truth");
    }
    if (cfg.command == Command::kSplit) {
      if (!(cfg.row_frac > 0.0 && cfg.row_frac < 1.0)) throw ConfigError("--row-frac must be in (0,1)");
      if (!(cfg.holdout_frac > 0.0 && cfg.holdout_frac < 1.0)) {
        throw ConfigError("--holdout-frac must be in (0,1)");
      }
    }
    if (cfg.command == Command::kBenchSolvers) {
      for (auto d : cfg.dims) {
        if (d == 0) throw ConfigError("--dims: dimensions must be >= 1");
      }
      if (cfg.trials == 0) throw ConfigError("--trials must be >= 1");
      if (cfg.bench_batch == 0) throw ConfigError("--batch must be >= 1");
    }
  } catch (const ConfigError& e) {
    throw UsageError(e.what(), app.help());
  }
  return cfg;
}

void run(const RunConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::kTrain: return run_train(config, out);
    case Command::kEval: return run_eval(config, out);
    case Command::kSplit: return run_split(config, out);
    case Command::kSynth: return run_synth(config, out);
    case Command::kBenchSolvers: return run_bench(config, out);
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging();
  auto report = [&](const char* kind, const std::exception& e, ExitCode code) {
    err << nlohmann::json{{"error", kind}, {"message", e.what()}}.dump() << '\n';
    return static_cast<int>(code);
  };
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return static_cast<int>(ExitCode::kOk);
    run(*cfg, out);
    return static_cast<int>(ExitCode::kOk);
  } catch (const UsageError& e) {
    err << e.help() << '\n';
    return report("usage", e, ExitCode::kUsage);
  } catch (const ConfigError& e) {
    return report("config", e, ExitCode::kUsage);
  } catch (const DataError& e) {
    return report("data", e, ExitCode::kData);
  } catch (const CodecError& e) {
    return report("data", e, ExitCode::kData);
  } catch (const NumericalError& e) {
    return report("numerical", e, ExitCode::kNumerical);
  } catch (const std::exception& e) {
    return report("internal", e, ExitCode::kFailure);
  }
}

}  // namespace alsx::cli
