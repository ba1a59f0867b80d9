#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebipla/dataset.hpp"
#include "ebipla/model.hpp"
#include "ebipla/noise.hpp"
#include "ebipla/particles.hpp"

namespace ebipla {

/// Any Langevin iterate whose norm exceeds this radius aborts the run.
inline constexpr double kDivergenceRadius = 1e8;

/// Noise keys used by a chain run: draws for step j of chain `id` use
/// {k = iteration, role = step_role, j, m = id}; the start uses init_role with j = 0.
struct ChainKeys {
  std::uint32_t iteration = 0;
  NoiseRole init_role = NoiseRole::kPriorInit;
  NoiseRole step_role = NoiseRole::kPrior;
};

/// Unadjusted Langevin steps x <- x - gamma grad_x U_alpha(x) + sqrt(2 gamma) W from the
/// given starting columns. Throws DivergenceError if any chain leaves the guard radius.
Matrix ula_run(const EnergyModel& model, const Vector& alpha, Matrix start,
               std::span<const std::uint32_t> chain_ids, double gamma, std::size_t steps,
               const NoiseStream& noise, const ChainKeys& keys);

/// Fresh N(0, I) start for each id, then `steps` ULA steps targeting p_alpha.
Matrix ula_prior_sample(const EnergyModel& model, const Vector& alpha,
                        std::span<const std::uint32_t> chain_ids, double gamma, std::size_t steps,
                        const NoiseStream& noise, const ChainKeys& keys = {});

/// Standard-normal start states for the given ids under `role`.
Matrix standard_normal_states(std::size_t dim, std::span<const std::uint32_t> ids,
                              const NoiseStream& noise, std::uint32_t iteration, NoiseRole role);

/// ids 0..count-1.
std::vector<std::uint32_t> iota_ids(std::size_t count);

/// Langevin steps targeting the posteriors p_theta(x | y_c): column c of `x` is paired
/// with column c of `y` and draws noise under {iteration, role, j, m = m_ids[c],
/// n = n_ids[c]}. Throws DivergenceError past the guard radius.
Matrix posterior_langevin(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                          Matrix x, const Matrix& y, std::span<const std::uint32_t> m_ids,
                          std::span<const std::uint32_t> n_ids, double step, std::size_t steps,
                          const NoiseStream& noise, std::uint32_t iteration, NoiseRole role);

/// Moves particles of the selected data points by -h (grad_x U + grad_x V) and, when
/// `inject_noise`, adds sqrt(2h) W^{m,n}_k. Other rows are untouched.
void posterior_particle_step(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                             ParticleCloud& cloud, const Dataset& data, double h,
                             const NoiseStream& noise, std::uint32_t iteration,
                             std::span<const std::uint32_t> selected, bool inject_noise = true);

/// Same step applied to every data point.
void posterior_particle_step(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                             ParticleCloud& cloud, const Dataset& data, double h,
                             const NoiseStream& noise, std::uint32_t iteration);

/// Full-batch Euler-Maruyama theta update with the closed-form prior expectation and
/// noise sqrt(2h / MN) per coordinate. Throws ConfigError if the model has no
/// closed-form expectation.
Theta theta_step_exact(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                       const ParticleCloud& cloud, const Dataset& data, double h,
                       const NoiseStream& noise, std::uint32_t iteration);

/// As theta_step_exact with the expectation replaced by (1/M) sum_m grad_alpha U(prior_m).
/// `prior_samples` holds one terminal ULA state per data point (d_x x M).
Theta theta_step_inexact(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                         const ParticleCloud& cloud, const Dataset& data, double h,
                         const Matrix& prior_samples, const NoiseStream& noise,
                         std::uint32_t iteration);

/// Monte Carlo estimate of the prior-expectation error zeta = E_{p_alpha}[grad_alpha U] - g.
struct ZetaStats {
  Vector mean;           // E[zeta]
  double bias_norm = 0;  // ||E[zeta]||
  double variance = 0;   // E||zeta - E[zeta]||^2, unbiased over replications
  std::size_t replications = 0;
};

/// Runs `replications` independent estimates g, each averaging `chains` fresh ULA chains
/// of length `steps` (steps = 0 uses the N(0, I) draws directly). Requires a model with a
/// closed-form prior expectation and replications >= 2.
ZetaStats measure_zeta_bias(const EnergyModel& model, const Vector& alpha, double gamma,
                            std::size_t steps, std::size_t replications, const NoiseStream& noise,
                            std::size_t chains = 1);

}  // namespace ebipla
