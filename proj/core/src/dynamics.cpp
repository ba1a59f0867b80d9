#include "ebipla/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "ebipla/parallel.hpp"

namespace ebipla {

namespace {

void check_guard(const Matrix& x, std::span<const std::uint32_t> ids, std::size_t first_col,
                 std::size_t step, std::uint32_t iteration) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double norm = x.col(c).norm();
    if (!(norm <= kDivergenceRadius)) {
      std::ostringstream msg;
      msg << "Langevin chain diverged: chain " << ids[first_col + static_cast<std::size_t>(c)]
          << " at step " << step << " of iteration " << iteration << " has norm " << norm
          << " (guard " << kDivergenceRadius << "); reduce the step size";
      throw DivergenceError(msg.str());
    }
  }
}

}  // namespace

std::vector<std::uint32_t> iota_ids(std::size_t count) {
  std::vector<std::uint32_t> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = static_cast<std::uint32_t>(i);
  return ids;
}

Matrix standard_normal_states(std::size_t dim, std::span<const std::uint32_t> ids,
                              const NoiseStream& noise, std::uint32_t iteration, NoiseRole role) {
  Matrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t c = 0; c < ids.size(); ++c) {
    noise.normal({.k = iteration, .role = role, .j = 0, .m = ids[c]},
                 {out.col(static_cast<Eigen::Index>(c)).data(), dim});
  }
  return out;
}

Matrix ula_run(const EnergyModel& model, const Vector& alpha, Matrix start,
               std::span<const std::uint32_t> chain_ids, double gamma, std::size_t steps,
               const NoiseStream& noise, const ChainKeys& keys) {
  if (!(gamma > 0.0)) throw ConfigError("ULA: step size gamma must be positive");
  require_dim("latent", model.latent_dim(), start.rows());
  require_dim("chains", chain_ids.size(), start.cols());
  const auto d = static_cast<std::size_t>(start.rows());
  const double noise_scale = std::sqrt(2.0 * gamma);
  const ChunkPlan plan{chain_ids.size(), detail::kColumnBlock};
  parallel_for(plan.chunks(), [&](std::size_t chunk) {
    const auto b = static_cast<Eigen::Index>(plan.begin(chunk));
    const auto width = static_cast<Eigen::Index>(plan.end(chunk)) - b;
    Matrix x = start.middleCols(b, width);
    Matrix w(x.rows(), width);
    for (std::size_t j = 0; j < steps; ++j) {
      for (Eigen::Index c = 0; c < width; ++c) {
        noise.normal({.k = keys.iteration,
                      .role = keys.step_role,
                      .j = static_cast<std::uint32_t>(j),
                      .m = chain_ids[static_cast<std::size_t>(b + c)]},
                     {w.col(c).data(), d});
      }
      x += -gamma * model.grad_x(alpha, x) + noise_scale * w;
      check_guard(x, chain_ids, static_cast<std::size_t>(b), j + 1, keys.iteration);
    }
    start.middleCols(b, width) = x;
  });
  return start;
}

Matrix ula_prior_sample(const EnergyModel& model, const Vector& alpha,
                        std::span<const std::uint32_t> chain_ids, double gamma, std::size_t steps,
                        const NoiseStream& noise, const ChainKeys& keys) {
  if (steps == 0) throw ConfigError("ULA prior sampling: J must be at least 1");
  Matrix start = standard_normal_states(model.latent_dim(), chain_ids, noise, keys.iteration,
                                        keys.init_role);
  return ula_run(model, alpha, std::move(start), chain_ids, gamma, steps, noise, keys);
}

Matrix posterior_langevin(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                          Matrix x, const Matrix& y, std::span<const std::uint32_t> m_ids,
                          std::span<const std::uint32_t> n_ids, double step, std::size_t steps,
                          const NoiseStream& noise, std::uint32_t iteration, NoiseRole role) {
  if (!(step > 0.0)) throw ConfigError("posterior Langevin: step size must be positive");
  check_compatible(model, decoder, theta);
  require_dim("batch", x.cols(), y.cols());
  require_dim("m ids", x.cols(), m_ids.size());
  require_dim("n ids", x.cols(), n_ids.size());
  const auto d = static_cast<std::size_t>(x.rows());
  const double noise_scale = std::sqrt(2.0 * step);
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), detail::kColumnBlock};
  parallel_for(plan.chunks(), [&](std::size_t chunk) {
    const auto b = static_cast<Eigen::Index>(plan.begin(chunk));
    const auto width = static_cast<Eigen::Index>(plan.end(chunk)) - b;
    Matrix xs = x.middleCols(b, width);
    const Matrix ys = y.middleCols(b, width);
    Matrix w(xs.rows(), width);
    for (std::size_t j = 0; j < steps; ++j) {
      for (Eigen::Index c = 0; c < width; ++c) {
        const auto i = static_cast<std::size_t>(b + c);
        noise.normal({.k = iteration, .role = role, .j = static_cast<std::uint32_t>(j),
                      .m = m_ids[i], .n = n_ids[i]},
                     {w.col(c).data(), d});
      }
      xs += -step * phi_grad_x_batch(model, decoder, theta, xs, ys) + noise_scale * w;
      check_guard(xs, m_ids, static_cast<std::size_t>(b), j + 1, iteration);
    }
    x.middleCols(b, width) = xs;
  });
  return x;
}

void posterior_particle_step(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                             ParticleCloud& cloud, const Dataset& data, double h,
                             const NoiseStream& noise, std::uint32_t iteration,
                             std::span<const std::uint32_t> selected, bool inject_noise) {
  if (!(h > 0.0)) throw ConfigError("posterior step: h must be positive");
  check_compatible(model, decoder, theta);
  require_dim("M (data vs particles)", data.size(), cloud.M());
  require_dim("particle latent", model.latent_dim(), cloud.latent_dim());
  for (std::uint32_t m : selected) {
    if (m >= cloud.M()) throw DimensionError("selected data index", cloud.M(), m);
  }
  const std::size_t N = cloud.N();
  const auto d = static_cast<Eigen::Index>(cloud.latent_dim());
  const double noise_scale = std::sqrt(2.0 * h);
  const std::size_t rows_per_chunk = std::max<std::size_t>(1, detail::kColumnBlock / N);
  const ChunkPlan plan{selected.size(), rows_per_chunk};

  parallel_for(plan.chunks(), [&](std::size_t chunk) {
    const std::size_t r0 = plan.begin(chunk);
    const std::size_t rows = plan.end(chunk) - r0;
    const auto width = static_cast<Eigen::Index>(rows * N);
    Matrix x(d, width);
    Matrix y(static_cast<Eigen::Index>(data.dim()), width);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint32_t m = selected[r0 + r];
      const auto off = static_cast<Eigen::Index>(r * N);
      x.middleCols(off, static_cast<Eigen::Index>(N)) = cloud.row(m);
      y.middleCols(off, static_cast<Eigen::Index>(N)).colwise() = data.y.col(m);
    }
    x -= h * phi_grad_x_batch(model, decoder, theta, x, y);
    if (inject_noise) {
      Vector w(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::uint32_t m = selected[r0 + r];
        for (std::size_t n = 0; n < N; ++n) {
          noise.normal({.k = iteration, .role = NoiseRole::kPosterior, .m = m,
                        .n = static_cast<std::uint32_t>(n)},
                       {w.data(), static_cast<std::size_t>(d)});
          x.col(static_cast<Eigen::Index>(r * N + n)) += noise_scale * w;
        }
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint32_t m = selected[r0 + r];
      for (std::size_t n = 0; n < N; ++n) {
        if (!x.col(static_cast<Eigen::Index>(r * N + n)).allFinite()) {
          std::ostringstream msg;
          msg << "posterior particle (m=" << m << ", n=" << n << ") became non-finite at iteration "
              << iteration;
          throw NumericalError(msg.str());
        }
      }
      cloud.row(m) = x.middleCols(static_cast<Eigen::Index>(r * N), static_cast<Eigen::Index>(N));
    }
  });
}

void posterior_particle_step(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                             ParticleCloud& cloud, const Dataset& data, double h,
                             const NoiseStream& noise, std::uint32_t iteration) {
  const auto all = iota_ids(cloud.M());
  posterior_particle_step(model, decoder, theta, cloud, data, h, noise, iteration, all, true);
}

namespace {

Theta theta_step(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                 const ParticleCloud& cloud, const Dataset& data, double h,
                 const Vector& expectation, const NoiseStream& noise, std::uint32_t iteration) {
  if (!(h > 0.0)) throw ConfigError("theta step: h must be positive");
  check_compatible(model, decoder, theta);
  const double mn = static_cast<double>(cloud.size());
  const double noise_scale = std::sqrt(2.0 * h / mn);

  Theta next;
  const Vector drift_alpha = phi_grad_alpha(model, theta.alpha, cloud, expectation);
  Vector w_alpha(theta.alpha.size());
  noise.normal({.k = iteration, .role = NoiseRole::kThetaAlpha},
               {w_alpha.data(), static_cast<std::size_t>(w_alpha.size())});
  next.alpha = theta.alpha - h * drift_alpha + noise_scale * w_alpha;

  if (theta.beta.size() > 0) {
    const Vector drift_beta = phi_grad_beta(decoder, theta.beta, cloud, data);
    Vector w_beta(theta.beta.size());
    noise.normal({.k = iteration, .role = NoiseRole::kThetaBeta},
                 {w_beta.data(), static_cast<std::size_t>(w_beta.size())});
    next.beta = theta.beta - h * drift_beta + noise_scale * w_beta;
  } else {
    require_dim("M (data vs particles)", data.size(), cloud.M());
    next.beta = theta.beta;
  }
  if (!next.all_finite()) {
    throw NumericalError("theta became non-finite at iteration " + std::to_string(iteration));
  }
  return next;
}

}  // namespace

Theta theta_step_exact(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                       const ParticleCloud& cloud, const Dataset& data, double h,
                       const NoiseStream& noise, std::uint32_t iteration) {
  const auto expectation = model.prior_expectation(theta.alpha);
  if (!expectation) {
    throw ConfigError("exact theta update needs a closed-form prior expectation; model '" +
                      model.name() + "' has none (use the inexact variant)");
  }
  return theta_step(model, decoder, theta, cloud, data, h, *expectation, noise, iteration);
}

Theta theta_step_inexact(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                         const ParticleCloud& cloud, const Dataset& data, double h,
                         const Matrix& prior_samples, const NoiseStream& noise,
                         std::uint32_t iteration) {
  require_dim("prior samples", cloud.M(), prior_samples.cols());
  require_dim("prior sample latent", model.latent_dim(), prior_samples.rows());
  const auto count = prior_samples.cols();
  const Vector weights = Vector::Constant(count, 1.0 / static_cast<double>(count));
  const Vector g = detail::blocked_grad_alpha(model, theta.alpha, prior_samples, weights);
  return theta_step(model, decoder, theta, cloud, data, h, g, noise, iteration);
}

ZetaStats measure_zeta_bias(const EnergyModel& model, const Vector& alpha, double gamma,
                            std::size_t steps, std::size_t replications, const NoiseStream& noise,
                            std::size_t chains) {
  if (replications < 2) throw ConfigError("measure_zeta_bias: needs at least 2 replications");
  if (chains == 0) throw ConfigError("measure_zeta_bias: chains must be positive");
  const auto expectation = model.prior_expectation(alpha);
  if (!expectation) {
    throw ConfigError("measure_zeta_bias: model '" + model.name() +
                      "' has no closed-form prior expectation");
  }
  const auto ids = iota_ids(replications * chains);
  Matrix samples = standard_normal_states(model.latent_dim(), ids, noise, 0, NoiseRole::kPriorInit);
  if (steps > 0) {
    samples = ula_run(model, alpha, std::move(samples), ids, gamma, steps, noise, {});
  }

  const auto p = static_cast<Eigen::Index>(model.param_dim());
  Matrix zeta(p, static_cast<Eigen::Index>(replications));
  const Vector weights = Vector::Constant(static_cast<Eigen::Index>(chains), 1.0 / static_cast<double>(chains));
  for (std::size_t r = 0; r < replications; ++r) {
    const auto block = samples.middleCols(static_cast<Eigen::Index>(r * chains), static_cast<Eigen::Index>(chains));
    zeta.col(static_cast<Eigen::Index>(r)) = *expectation - model.weighted_grad_alpha(alpha, block, weights);
  }

  ZetaStats stats;
  stats.replications = replications;
  stats.mean = zeta.rowwise().mean();
  stats.bias_norm = stats.mean.norm();
  stats.variance = (zeta.colwise() - stats.mean).colwise().squaredNorm().sum() /
                   static_cast<double>(replications - 1);
  return stats;
}

}  // namespace ebipla
