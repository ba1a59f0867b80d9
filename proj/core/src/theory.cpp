#include "ebipla/theory.hpp"

#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "ebipla/dynamics.hpp"
#include "ebipla/errors.hpp"

namespace ebipla {

double ConvexityProfile::h_max() const { return 2.0 / (mu + smoothness); }

void ConvexityProfile::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("convexity: mu must be positive");
  if (!(smoothness >= mu) || !std::isfinite(smoothness)) {
    throw ConfigError("convexity: need L >= mu");
  }
  if (d_theta == 0 || d_x == 0 || M == 0 || N == 0) {
    throw ConfigError("convexity: d_theta, d_x, M and N must be positive");
  }
}

void check_step_size(const ConvexityProfile& profile, double h) {
  profile.validate();
  if (!(h > 0.0) || h > profile.h_max()) {
    std::ostringstream msg;
    msg << "step size h = " << h << " violates the restriction 0 < h <= 2 / (mu + L) = "
        << profile.h_max();
    throw ConfigError(msg.str());
  }
}

double c1_exact(const ConvexityProfile& p) {
  const double mn = p.particles();
  return 1.65 * (p.smoothness / p.mu) *
         std::sqrt((static_cast<double>(p.d_theta) + mn * static_cast<double>(p.d_x)) / mn);
}

double c2_exact(const ConvexityProfile& p) {
  return std::sqrt(static_cast<double>(p.d_theta) / p.mu);
}

double c1_inexact(const ConvexityProfile& p, const BiasProfile& bias) {
  const double mn = p.particles();
  const double denom =
      1.65 * p.smoothness * std::pow(mn, 1.5) *
          std::sqrt(static_cast<double>(p.d_theta) + mn * static_cast<double>(p.d_x)) +
      bias.sigma * mn * std::sqrt(p.mu);
  return c1_exact(p) + bias.sigma * bias.sigma / denom;
}

double c2_inexact(const ConvexityProfile& p, const BiasProfile& bias) {
  return bias.delta / p.mu + c2_exact(p);
}

namespace {

double assemble(const ConvexityProfile& p, double h, std::size_t k, double w2_init, double c1,
                double c2) {
  if (!(w2_init >= 0.0)) throw ConfigError("W2_init must be non-negative");
  const double contraction = std::pow(1.0 - p.mu * h, static_cast<double>(k));
  return contraction * w2_init + c1 * std::sqrt(h) + c2 / std::sqrt(p.particles());
}

}  // namespace

double bound_exact(const ConvexityProfile& profile, double h, std::size_t k, double w2_init) {
  check_step_size(profile, h);
  return assemble(profile, h, k, w2_init, c1_exact(profile), c2_exact(profile));
}

double bound_inexact(const ConvexityProfile& profile, const BiasProfile& bias, double h,
                     std::size_t k, double w2_init) {
  check_step_size(profile, h);
  if (!(bias.delta >= 0.0) || !(bias.sigma >= 0.0) || !std::isfinite(bias.delta) ||
      !std::isfinite(bias.sigma)) {
    throw ConfigError("bias profile: delta and sigma must be finite and non-negative");
  }
  return assemble(profile, h, k, w2_init, c1_inexact(profile, bias), c2_inexact(profile, bias));
}

double concentration_envelope(const ConvexityProfile& profile) {
  return std::sqrt(static_cast<double>(profile.d_theta) / (profile.mu * profile.particles()));
}

double w2_init_overestimate(const ConvexityProfile& profile, const Theta& theta0,
                            const Theta& theta_star, double cloud_radius) {
  const Vector diff = theta0.flat() - theta_star.flat();
  return diff.norm() + concentration_envelope(profile) + cloud_radius;
}

GaussianLocationProfile profile_of_gaussian_location(const Dataset& data, std::size_t N,
                                                     double prior_var, double lik_var) {
  if (!(prior_var > 0.0) || !(lik_var > 0.0)) {
    throw ConfigError("Gaussian location profile: variances must be positive");
  }
  if (data.size() == 0) throw ConfigError("Gaussian location profile: empty dataset");
  const double a = 1.0 / prior_var;
  const double b = 1.0 / lik_var;
  // Eigenvalues of [[a, -a], [-a, a + b]].
  const double tr = 2.0 * a + b;
  const double disc = std::sqrt(4.0 * a * a + b * b);
  GaussianLocationProfile out;
  out.profile.mu = 0.5 * (tr - disc);
  out.profile.smoothness = 0.5 * (tr + disc);
  out.profile.d_theta = data.dim();
  out.profile.d_x = data.dim();
  out.profile.M = data.size();
  out.profile.N = N;
  out.theta_star.alpha = data.y.rowwise().mean();
  out.theta_star.beta = Vector();

  // Posterior mode at theta*: (lik_var alpha* + prior_var y) / (prior_var + lik_var).
  Matrix x_star = (lik_var * out.theta_star.alpha).replicate(1, data.y.cols()) + prior_var * data.y;
  x_star /= prior_var + lik_var;
  const double mean_sq = x_star.colwise().squaredNorm().mean();
  const double d = static_cast<double>(data.dim());
  out.cloud_radius = std::sqrt(d + mean_sq) + std::sqrt(d / out.profile.mu);
  return out;
}

double rescaling_equivalence_check(const EnergyModel& model, const Decoder& decoder,
                                   const Dataset& data, const Theta& theta0,
                                   const RescalingConfig& config) {
  if (!model.prior_expectation(theta0.alpha)) {
    throw ConfigError("rescaling check needs a closed-form prior expectation");
  }
  RunConfig run;
  run.algorithm = Algorithm::kFullExact;
  run.N = config.N;
  run.h = config.h;
  run.seed = config.seed;
  run.validate(data.size());
  const NoiseStream noise(config.seed);
  const NoiseStream scaled_noise(config.desynchronize ? split_seed(config.seed, 1) : config.seed);

  TrainState state = initial_state(run, model, decoder, data, theta0);
  const std::size_t M = data.size();
  const std::size_t N = config.N;
  const double mn = static_cast<double>(M * N);
  const double s = std::sqrt(mn);
  const double h = config.h;
  const auto d = static_cast<std::size_t>(model.latent_dim());

  // Rescaled system: Z = X / sqrt(MN).
  Theta theta_s = theta0;
  Matrix z = state.cloud.data() / s;
  Matrix targets(static_cast<Eigen::Index>(data.dim()), static_cast<Eigen::Index>(M * N));
  for (std::size_t m = 0; m < M; ++m) {
    targets.middleCols(static_cast<Eigen::Index>(m * N), static_cast<Eigen::Index>(N)).colwise() =
        data.y.col(static_cast<Eigen::Index>(m));
  }
  const double theta_scale = std::sqrt(2.0 * h / mn);
  const double z_scale = std::sqrt(2.0 * h / mn);

  double worst = 0.0;
  for (std::size_t k = 0; k < config.steps; ++k) {
    const auto it = static_cast<std::uint32_t>(k);

    // Original coordinates through the library update.
    Theta next = theta_step_exact(model, decoder, state.theta, state.cloud, data, h, noise, it);
    posterior_particle_step(model, decoder, state.theta, state.cloud, data, h, noise, it);
    state.theta = std::move(next);

    // Rescaled coordinates: gradients evaluated at sqrt(MN) Z.
    ParticleCloud x_of_z(M, N, d);
    x_of_z.data() = s * z;
    Theta next_s;
    const Vector drift_alpha =
        phi_grad_alpha(model, theta_s.alpha, x_of_z, *model.prior_expectation(theta_s.alpha));
    Vector w_alpha(theta_s.alpha.size());
    scaled_noise.normal({.k = it, .role = NoiseRole::kThetaAlpha},
                        {w_alpha.data(), static_cast<std::size_t>(w_alpha.size())});
    next_s.alpha = theta_s.alpha - h * drift_alpha + theta_scale * w_alpha;
    if (theta_s.beta.size() > 0) {
      const Vector drift_beta = phi_grad_beta(decoder, theta_s.beta, x_of_z, data);
      Vector w_beta(theta_s.beta.size());
      scaled_noise.normal({.k = it, .role = NoiseRole::kThetaBeta},
                          {w_beta.data(), static_cast<std::size_t>(w_beta.size())});
      next_s.beta = theta_s.beta - h * drift_beta + theta_scale * w_beta;
    } else {
      next_s.beta = theta_s.beta;
    }
    const Matrix grad = detail::blocked_grad_x(model, decoder, theta_s, x_of_z.data(), targets);
    z -= (h / s) * grad;
    Vector w(static_cast<Eigen::Index>(d));
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t n = 0; n < N; ++n) {
        scaled_noise.normal({.k = it, .role = NoiseRole::kPosterior,
                             .m = static_cast<std::uint32_t>(m), .n = static_cast<std::uint32_t>(n)},
                            {w.data(), d});
        z.col(static_cast<Eigen::Index>(m * N + n)) += z_scale * w;
      }
    }
    theta_s = std::move(next_s);

    const double gap = (state.theta.flat() - theta_s.flat()).cwiseAbs().maxCoeff();
    if (!std::isfinite(gap)) throw NumericalError("rescaling check: non-finite divergence");
    worst = std::max(worst, gap);
  }
  return worst;
}

std::vector<ConcentrationRow> pi_theta_concentration_check(
    const EnergyModel& model, const Decoder& decoder, const Dataset& data, const Theta& theta0,
    const Theta& theta_star, const ConvexityProfile& profile, const ConcentrationConfig& config) {
  if (config.burn_in >= config.K) throw ConfigError("concentration check: burn-in must be < K");
  if (config.seeds == 0) throw ConfigError("concentration check: need at least one seed");
  std::vector<ConcentrationRow> rows;
  for (std::size_t N : config.N_values) {
    ConvexityProfile p = profile;
    p.N = N;
    p.M = data.size();
    check_step_size(p, config.h);

    RunConfig run;
    run.algorithm = Algorithm::kFullExact;
    run.N = N;
    run.K = config.K;
    run.h = config.h;
    run.mu = p.mu;
    run.smoothness = p.smoothness;

    double sum_sq = 0.0;
    std::size_t count = 0;
    RunHooks hooks;
    hooks.observer = [&](std::size_t k, const TrainState& state) {
      if (k <= config.burn_in) return;
      sum_sq += (state.theta.flat() - theta_star.flat()).squaredNorm();
      ++count;
    };
    for (std::size_t s = 0; s < config.seeds; ++s) {
      run.seed = split_seed(config.seed, s);
      run_full(run, model, decoder, data, theta0, hooks);
    }
    ConcentrationRow row;
    row.N = N;
    row.h = config.h;
    row.rms_error = std::sqrt(sum_sq / static_cast<double>(count));
    row.envelope = concentration_envelope(p);
    row.bound = bound_exact(p, config.h, config.burn_in,
                            w2_init_overestimate(p, theta0, theta_star, config.cloud_radius));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ebipla
