#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ebipla/adam.hpp"
#include "ebipla/dataset.hpp"
#include "ebipla/model.hpp"
#include "ebipla/noise.hpp"
#include "ebipla/particles.hpp"

namespace ebipla {

enum class Algorithm { kFullExact, kFullInexact, kPractical, kPracticalWarmup, kLebmBaseline };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);
/// Minibatch algorithms count K in epochs; the full algorithms count iterations.
bool is_minibatch(Algorithm algorithm);

/// Predictor-corrector warmup: `corrector_steps` Langevin steps of size `h` on
/// `initial_particles` particles per data point for the first `iterations` batch
/// iterations, then every particle is replicated up to N.
struct WarmupConfig {
  std::size_t iterations = 0;
  double h = 0.005;
  std::size_t initial_particles = 1;
  std::size_t corrector_steps = 10;
};

/// Short-run posterior MCMC baseline: fresh N(0, I) chains of `posterior_steps` steps
/// of size `step_size`, one per data point in the batch.
struct LebmConfig {
  std::size_t posterior_steps = 32;
  double step_size = 0.005;
};

struct EvalSettings {
  bool enabled = false;
  std::size_t mmd_samples = 1000;
  std::size_t prior_steps = 500;
  /// Step size of the generation chains; 0 means "use the training gamma".
  double gamma = 0.0;
  double bandwidth = 0.1;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kPractical;
  std::size_t N = 16;
  std::size_t K = 1;
  std::size_t J = 60;
  double h = 0.9;
  double gamma = 0.007;
  /// Multiplies h in the minibatch posterior step and its noise addition (drift h s grad,
  /// injected variance 2 h s / L per epoch pass). The target posterior does not depend on s.
  double posterior_step_scale = 1.0;
  std::size_t batch_size = 1000;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig energy_optimizer{};
  AdamConfig generator_optimizer{};
  WarmupConfig warmup{};
  LebmConfig lebm{};
  EvalSettings eval{};
  std::uint64_t seed = 0;
  /// Test hook: every Gaussian draw is zero.
  bool zero_noise = false;
  /// Record every `metric_cadence` iterations (full) or epochs (minibatch); 0 = final only.
  std::size_t metric_cadence = 0;
  double init_particle_std = 1.0;
  /// Convexity constants when known; enables the h <= 2 / (mu + L) check.
  std::optional<double> mu;
  std::optional<double> smoothness;

  /// Throws ConfigError on any violated precondition for a dataset of size M.
  void validate(std::size_t M) const;
};

struct MetricsRecord {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double energy_loss = 0.0;
  double generator_loss = 0.0;
  double param_error = 0.0;  // NaN when no reference parameter is known
  double mmd = 0.0;          // NaN when not evaluated
  double wall_ms = 0.0;
};

/// Gradient evaluations spent on each family of chains.
struct GradientBudget {
  std::uint64_t posterior = 0;  // grad_x phi on posterior particles / chains
  std::uint64_t prior = 0;      // grad_x U in prior ULA chains
  std::uint64_t epochs = 0;
  std::uint64_t posterior_chains = 0;  // persistent particles (M N) or fresh chains (M)

  double posterior_per_epoch() const;
  /// Posterior gradient evaluations per chain per epoch: 1 for a particle cloud, T for a
  /// T-step short-run chain.
  double posterior_per_chain_per_epoch() const;
};

struct TrainState {
  Theta theta;
  ParticleCloud cloud;
  Optimizer energy_optimizer;
  Optimizer generator_optimizer;
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double batches_per_epoch = 1.0;  // L = M / B, real-valued
};

struct TrainResult {
  TrainState state;
  std::vector<MetricsRecord> metrics;
  GradientBudget budget;
  double wall_ms = 0.0;
};

struct RunHooks {
  std::optional<Theta> theta_star;
  /// Held-out data-space samples for MMD at every recorded metric (requires eval.enabled).
  std::optional<Matrix> mmd_reference;
  /// Called after every iteration with the iteration count and the new state.
  std::function<void(std::size_t, const TrainState&)> observer;
};

/// Deterministic default parameters for the supported model/decoder types.
Theta default_initial_theta(const EnergyModel& model, const Decoder& decoder, std::uint64_t seed);

/// Theta, particles N(0, init_particle_std^2 I) and optimizers before the first step.
TrainState initial_state(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                         const Dataset& data, const Theta& theta0);

/// Energy and generator losses on a batch, with their parameter gradients.
struct SubsampledLosses {
  double energy_loss = 0.0;
  double generator_loss = 0.0;
  Vector grad_alpha;
  Vector grad_beta;
};

/// Energy loss (1/(N|B|)) sum U(X^{m,n}) - (1/|B|) sum U(prior_m) and generator loss
/// (1/(N|B|)) sum V(X^{m,n}, y_m) over the batch, with gradients w.r.t. alpha and beta.
/// `prior_samples` holds one column per batch entry, in batch order.
SubsampledLosses subsampled_losses(const EnergyModel& model, const Decoder& decoder,
                                   const Theta& theta, const ParticleCloud& cloud,
                                   const Dataset& data, std::span<const std::uint32_t> batch,
                                   const Matrix& prior_samples);

/// Adds sqrt(2h / L) W to every particle (per-coordinate variance 2h / L).
void epoch_noise_addition(ParticleCloud& cloud, double h, double L, const NoiseStream& noise,
                          std::uint32_t iteration);

/// Random permutation of [0, M) split into ceil(M / B) batches, each sorted ascending.
std::vector<std::vector<std::uint32_t>> epoch_batches(std::size_t M, std::size_t B,
                                                      const NoiseStream& noise,
                                                      std::uint32_t epoch);

TrainResult run_full(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                     const Dataset& data, const Theta& theta0, const RunHooks& hooks = {});
TrainResult run_practical(const RunConfig& config, const EnergyModel& model,
                          const Decoder& decoder, const Dataset& data, const Theta& theta0,
                          const RunHooks& hooks = {});
TrainResult run_warmup(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                       const Dataset& data, const Theta& theta0, const RunHooks& hooks = {});
TrainResult run_lebm_baseline(const RunConfig& config, const EnergyModel& model,
                              const Decoder& decoder, const Dataset& data, const Theta& theta0,
                              const RunHooks& hooks = {});

/// Dispatches on config.algorithm.
TrainResult train(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                  const Dataset& data, const Theta& theta0, const RunHooks& hooks = {});

/// Metrics CSV: iteration,epoch,energy_loss,generator_loss,param_error,mmd. Wall-clock
/// lives in a separate timing CSV (iteration,epoch,wall_ms) so metrics are reproducible
/// byte for byte.
std::string metrics_csv(const std::vector<MetricsRecord>& records);
std::string timing_csv(const std::vector<MetricsRecord>& records);
/// Locale-independent shortest round-trip formatting; "nan" for NaN.
std::string format_double(double value);

}  // namespace ebipla
