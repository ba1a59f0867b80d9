#include "ebipla/eval.hpp"

#include <cmath>
#include <limits>

#include "ebipla/dynamics.hpp"
#include "ebipla/parallel.hpp"

namespace ebipla {

double rbf_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                  double bandwidth) {
  return std::exp(-bandwidth * (x - y).squaredNorm());
}

namespace {

// Row sums of the kernel matrix between a and b, skipping i == j when `skip_diagonal`.
// Rows are split in fixed blocks; each row sum is accumulated in column order.
Vector kernel_row_sums(const Matrix& a, const Matrix& b, double bandwidth, bool skip_diagonal) {
  Vector sums(a.cols());
  const ChunkPlan plan{static_cast<std::size_t>(a.cols()), 64};
  parallel_for(plan.chunks(), [&](std::size_t chunk) {
    for (auto i = static_cast<Eigen::Index>(plan.begin(chunk));
         i < static_cast<Eigen::Index>(plan.end(chunk)); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        if (skip_diagonal && i == j) continue;
        s += std::exp(-bandwidth * (a.col(i) - b.col(j)).squaredNorm());
      }
      sums(i) = s;
    }
  });
  return sums;
}

double ordered_sum(const Vector& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
  return s;
}

}  // namespace

double mmd_unbiased(const Matrix& p, const Matrix& q, const MmdConfig& config) {
  if (!(config.bandwidth > 0.0)) throw ConfigError("MMD: bandwidth must be positive");
  if (p.cols() < 2 || q.cols() < 2) {
    throw ConfigError("MMD: the unbiased estimator needs at least 2 samples per set");
  }
  require_dim("sample dim", p.rows(), q.rows());
  const auto m = static_cast<double>(p.cols());
  const auto n = static_cast<double>(q.cols());
  const double pp = ordered_sum(kernel_row_sums(p, p, config.bandwidth, true)) / (m * (m - 1.0));
  const double qq = ordered_sum(kernel_row_sums(q, q, config.bandwidth, true)) / (n * (n - 1.0));
  const double pq = ordered_sum(kernel_row_sums(p, q, config.bandwidth, false)) / (m * n);
  return pp + qq - 2.0 * pq;
}

Matrix generate_samples(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                        std::size_t count, std::size_t prior_steps, double gamma,
                        const NoiseStream& noise, std::uint32_t stream,
                        bool add_observation_noise) {
  if (prior_steps == 0) throw ConfigError("generate_samples: prior_steps must be at least 1");
  check_compatible(model, decoder, theta);
  const auto ids = iota_ids(count);
  const ChainKeys keys{.iteration = stream,
                       .init_role = NoiseRole::kGenerateInit,
                       .step_role = NoiseRole::kGenerate};
  const Matrix latents = ula_prior_sample(model, theta.alpha, ids, gamma, prior_steps, noise, keys);
  Matrix samples = decoder.generate(theta.beta, latents);
  if (add_observation_noise) {
    Vector w(samples.rows());
    for (std::size_t c = 0; c < count; ++c) {
      noise.normal({.k = stream, .role = NoiseRole::kObservation, .m = ids[c]},
                   {w.data(), static_cast<std::size_t>(w.size())});
      samples.col(static_cast<Eigen::Index>(c)) += decoder.sigma() * w;
    }
  }
  return samples;
}

double parameter_error(const Theta& theta, const Theta& theta_star) {
  require_dim("alpha", theta_star.alpha.size(), theta.alpha.size());
  require_dim("beta", theta_star.beta.size(), theta.beta.size());
  return std::sqrt((theta.alpha - theta_star.alpha).squaredNorm() +
                   (theta.beta - theta_star.beta).squaredNorm());
}

double rms(std::span<const double> errors) {
  if (errors.empty()) throw ConfigError("rms: no values");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

MapResult map_latent(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                     const Vector& y, const MapConfig& config, const NoiseStream& noise,
                     std::uint32_t stream) {
  if (config.restarts == 0) throw ConfigError("map_latent: restarts must be at least 1");
  check_compatible(model, decoder, theta);
  require_dim("data dim", decoder.data_dim(), y.size());
  const auto d = static_cast<Eigen::Index>(model.latent_dim());

  auto objective = [&](const Vector& x) {
    const double value = model.u(theta.alpha, x) + decoder.v(theta.beta, x, y);
    if (!std::isfinite(value)) throw NumericalError("map_latent: non-finite objective");
    return value;
  };

  MapResult result;
  result.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < config.restarts; ++r) {
    Vector x(d);
    noise.normal({.k = stream, .role = NoiseRole::kMapInit, .m = static_cast<std::uint32_t>(r)},
                 {x.data(), static_cast<std::size_t>(d)});
    AdamState adam(config.adam, static_cast<std::size_t>(d));
    Vector best_x = x;
    double best = objective(x);
    double plateau_best = best;
    std::size_t bad = 0;
    for (std::size_t it = 0; it < config.iterations; ++it) {
      x = adam_step(adam, x, phi_grad_x(model, decoder, theta, x, y));
      const double value = objective(x);
      if (value < best) {
        best = value;
        best_x = x;
      }
      if (value < plateau_best - config.plateau_threshold * std::abs(plateau_best)) {
        plateau_best = value;
        bad = 0;
      } else if (++bad > config.plateau_patience) {
        adam.config.lr *= config.plateau_factor;
        bad = 0;
      }
    }
    result.restart_objectives.push_back(best);
    if (best < result.objective) {
      result.objective = best;
      result.x = best_x;
    }
  }
  return result;
}

}  // namespace ebipla
