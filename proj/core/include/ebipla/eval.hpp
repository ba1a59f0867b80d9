#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebipla/adam.hpp"
#include "ebipla/model.hpp"
#include "ebipla/noise.hpp"

namespace ebipla {

/// k(x, y) = exp(-bandwidth * ||x - y||^2). The bandwidth multiplies the squared distance.
struct MmdConfig {
  double bandwidth = 0.1;
};

double rbf_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                  double bandwidth);

/// Unbiased MMD^2 estimate between the columns of `p` (m points) and `q` (n points). Both
/// self-similarity sums exclude the diagonal. May be negative.
double mmd_unbiased(const Matrix& p, const Matrix& q, const MmdConfig& config = {});

/// `count` independent ULA chains of `prior_steps` steps targeting p_alpha, pushed through
/// g_beta. Observation noise N(0, sigma^2 I) is added only when requested.
Matrix generate_samples(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                        std::size_t count, std::size_t prior_steps, double gamma,
                        const NoiseStream& noise, std::uint32_t stream = 0,
                        bool add_observation_noise = false);

/// ||theta - theta_star|| over the concatenated (alpha, beta) vector.
double parameter_error(const Theta& theta, const Theta& theta_star);
/// sqrt(mean(e^2)) over per-seed errors.
double rms(std::span<const double> errors);

struct MapConfig {
  std::size_t restarts = 4;
  std::size_t iterations = 50;
  AdamConfig adam{.lr = 1.0, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .decay = 1.0};
  /// Reduce-on-plateau schedule: lr *= factor after `patience` iterations without a
  /// relative improvement of `threshold`.
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 10;
  double plateau_threshold = 1e-4;
};

struct MapResult {
  Vector x;
  double objective = 0.0;
  std::vector<double> restart_objectives;  // best value reached by each restart
};

/// argmin_x ||y - g_beta(x)||^2 / (2 sigma^2) + U_alpha(x), best of several Adam runs
/// started from N(0, I).
MapResult map_latent(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                     const Vector& y, const MapConfig& config, const NoiseStream& noise,
                     std::uint32_t stream = 0);

}  // namespace ebipla
