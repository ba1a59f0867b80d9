#pragma once

#include <cstdint>
#include <vector>

#include "ebipla/dataset.hpp"
#include "ebipla/model.hpp"
#include "ebipla/trainer.hpp"

namespace ebipla {

/// Strong convexity mu and gradient Lipschitz constant L of the joint negative
/// log-likelihood, with the problem sizes entering the bounds.
struct ConvexityProfile {
  double mu = 1.0;
  double smoothness = 1.0;
  std::size_t d_theta = 1;
  std::size_t d_x = 1;
  std::size_t M = 1;
  std::size_t N = 1;

  /// Largest admissible step, 2 / (mu + L).
  double h_max() const;
  void validate() const;
  double particles() const { return static_cast<double>(M) * static_cast<double>(N); }
};

/// Bias bound delta and variance bound sigma of the prior-expectation error.
struct BiasProfile {
  double delta = 0.0;
  double sigma = 0.0;
};

/// Throws ConfigError unless 0 < h <= 2 / (mu + L).
void check_step_size(const ConvexityProfile& profile, double h);

/// C1 = 1.65 (L / mu) sqrt((d_theta + M N d_x) / (M N)).
double c1_exact(const ConvexityProfile& profile);
/// C2 = sqrt(d_theta / mu).
double c2_exact(const ConvexityProfile& profile);
/// C1 + sigma^2 / (1.65 L (MN)^{3/2} sqrt(d_theta + MN d_x) + sigma MN sqrt(mu)).
double c1_inexact(const ConvexityProfile& profile, const BiasProfile& bias);
/// delta / mu + sqrt(d_theta / mu).
double c2_inexact(const ConvexityProfile& profile, const BiasProfile& bias);

/// (1 - mu h)^k W2_init + C1 sqrt(h) + C2 / sqrt(MN).
double bound_exact(const ConvexityProfile& profile, double h, std::size_t k, double w2_init);
/// As bound_exact with the inexact constants.
double bound_inexact(const ConvexityProfile& profile, const BiasProfile& bias, double h,
                     std::size_t k, double w2_init);

/// sqrt(d_theta / (mu M N)): spread of the stationary parameter marginal around theta*.
double concentration_envelope(const ConvexityProfile& profile);

/// Over-estimate of the initial Wasserstein distance: ||theta0 - theta*|| plus the
/// concentration envelope plus the radius of the rescaled particle initialisation.
double w2_init_overestimate(const ConvexityProfile& profile, const Theta& theta0,
                            const Theta& theta_star, double cloud_radius);

struct GaussianLocationProfile {
  ConvexityProfile profile;
  Theta theta_star;
  /// Over-estimate of the rescaled distance between a N(0, I) particle start and the
  /// stationary cloud: sqrt(d_x + mean_m ||x*_m||^2) + sqrt(d_x / mu), where x*_m is the
  /// posterior mode of data point m at theta*.
  double cloud_radius = 0.0;
};

/// Gaussian location prior N(alpha, prior_var I) with identity decoder of variance
/// lik_var. mu and L are the extreme eigenvalues of
/// [[1/p, -1/p], [-1/p, 1/p + 1/l]]; the maximiser of the marginal likelihood is the
/// data mean, since y ~ N(alpha, (p + l) I).
GaussianLocationProfile profile_of_gaussian_location(const Dataset& data, std::size_t N,
                                                     double prior_var = 1.0,
                                                     double lik_var = 1.0);

struct RescalingConfig {
  std::size_t N = 4;
  double h = 0.1;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  /// Negative control: the rescaled system draws from a different stream.
  bool desynchronize = false;
};

/// Runs the particle system in original coordinates (library update) next to the
/// system in rescaled coordinates Z = X / sqrt(MN), driven by the same noise, and
/// returns max_k ||theta_k - theta_k^scaled||_inf. Needs a closed-form prior expectation.
double rescaling_equivalence_check(const EnergyModel& model, const Decoder& decoder,
                                   const Dataset& data, const Theta& theta0,
                                   const RescalingConfig& config);

struct ConcentrationConfig {
  std::vector<std::size_t> N_values{1, 4, 16, 64};
  double h = 0.1;
  std::size_t K = 2000;
  std::size_t burn_in = 1000;
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  /// Passed to w2_init_overestimate; particles start from N(0, I).
  double cloud_radius = 0.0;
};

struct ConcentrationRow {
  std::size_t N = 0;
  double h = 0.0;
  double rms_error = 0.0;  // over seeds and post-burn-in iterates
  double envelope = 0.0;   // sqrt(d_theta / (mu M N))
  double bound = 0.0;      // bound_exact at k = burn_in with the W2_init over-estimate
};

/// Long runs of the exact full algorithm at each N on a testbed with known theta*.
/// `profile` supplies mu and L; its N is overridden per row.
std::vector<ConcentrationRow> pi_theta_concentration_check(
    const EnergyModel& model, const Decoder& decoder, const Dataset& data, const Theta& theta0,
    const Theta& theta_star, const ConvexityProfile& profile, const ConcentrationConfig& config);

}  // namespace ebipla
