#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"

namespace ebipla::cli {

/// One grid axis: a dotted config path and the values it takes.
struct SweepAxis {
  std::string path;
  std::vector<json> values;
};

struct SweepSpec {
  std::vector<SweepAxis> grid;
  std::vector<std::uint64_t> seeds;

  std::size_t cells() const;
  std::size_t runs() const { return cells() * seeds.size(); }
  void validate() const;
};

/// {"grid": [{"path": "N", "values": [4, 16]}], "seeds": [1, 2]} or "num_seeds": n, which
/// expands to split_seed(master_seed, i) for i < n.
SweepSpec parse_sweep(const json& section, std::uint64_t master_seed);

struct RunRecord {
  std::size_t cell = 0;
  std::string cell_key;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double final_mmd = 0.0;
  double final_param_error = 0.0;
  GradientBudget budget;
  double wall_ms = 0.0;
};

struct CellAggregate {
  std::size_t cell = 0;
  std::string cell_key;
  std::string metric;
  std::size_t count = 0;  // successful runs with a finite value
  double mean = 0.0;
  double stderr_mean = 0.0;  // sample std / sqrt(count); 0 for a single run
  double median = 0.0;
};

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<CellAggregate> aggregates;
  bool all_ok() const;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double median = 0.0;
};
/// Non-finite values are skipped.
Summary summarize(std::span<const double> values);

/// Runs every (cell, seed) pair of the cartesian grid on top of `base`. Cells are
/// visited in grid order (last axis fastest); failures are recorded, not thrown.
SweepResult run_sweep(const json& base, const SweepSpec& spec, std::ostream* log = nullptr);

/// cell,seed,status,final_mmd,final_param_error,posterior_evals,prior_evals,epochs,
/// posterior_per_epoch,posterior_per_chain_per_epoch,error
std::string sweep_runs_csv(const SweepResult& result);
/// cell,metric,count,mean,stderr,median
std::string sweep_summary_csv(const SweepResult& result);
/// cell,seed,wall_ms
std::string sweep_timing_csv(const SweepResult& result);

}  // namespace ebipla::cli
