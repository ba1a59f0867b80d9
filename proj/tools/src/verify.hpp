#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "ebipla/dynamics.hpp"
#include "ebipla/theory.hpp"

namespace ebipla::cli {

/// Gaussian location testbed for the bound checks and Gaussian scale testbed for the
/// prior-expectation error.
struct VerifySettings {
  std::size_t M = 100;
  std::size_t dim = 1;
  double data_mean = 1.0;
  double data_std = 1.4142135623730951;
  std::vector<std::size_t> N_values{1, 4, 16, 64};
  std::vector<double> h_values{0.05, 0.1};
  std::size_t K = 2000;
  std::size_t burn_in = 1000;
  std::size_t seeds = 20;
  /// Largest admissible error(max N) / error(min N).
  double max_scaling_ratio = 0.35;
  std::size_t rescaling_steps = 100;
  std::size_t rescaling_N = 4;
  double rescaling_tolerance = 1e-10;
  std::vector<std::size_t> J_values{5, 50, 200};
  std::size_t zeta_replications = 10000;
  std::size_t zeta_chains = 10;
  double zeta_gamma = 0.01;
  double zeta_scale = 4.0;
  std::size_t zeta_dim = 2;
  std::uint64_t seed = 0;
};

VerifySettings parse_verify(const json& section);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ZetaRow {
  std::size_t J = 0;
  ZetaStats stats;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<ConcentrationRow> rows;
  std::vector<ZetaRow> zeta;
  bool all_passed() const;
};

/// Runs every check and prints one PASS/FAIL line per check to `out`.
VerifyReport run_verification(const VerifySettings& settings, std::ostream& out);

/// N,h,empirical_error,bound,envelope
std::string verify_csv(const VerifyReport& report);
/// J,bias_norm,variance,replications
std::string zeta_csv(const VerifyReport& report);

}  // namespace ebipla::cli
