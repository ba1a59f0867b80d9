#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace ebipla::cli {

/// Exit codes: 0 success, 1 run failure or failed check, 2 usage / configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  bool out_explicit = false;
  std::size_t threads = 0;  // 0: EBIPLA_THREADS, then 1
};

struct TrainOutcome {
  ExperimentConfig config;
  TrainResult result;
};

/// Builds data, model and decoder from a resolved config and trains.
TrainOutcome run_experiment(const ExperimentConfig& config);

/// Writes config.json, metrics.csv, timing.csv, checkpoint.{json,bin} and summary.json.
void write_train_outputs(const TrainOutcome& outcome, const std::filesystem::path& dir);

int cmd_gen_data(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval_mmd(const CommonOptions& options, const std::filesystem::path& a,
                 const std::filesystem::path& b, double bandwidth, std::ostream& out,
                 std::ostream& err);
int cmd_verify_bound(const CommonOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ebipla::cli
