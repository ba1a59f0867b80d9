#pragma once

#include <cstdint>
#include <numbers>

#include <Eigen/Core>

#include "ebipla/dataset.hpp"

namespace ebipla {

/// Rotated Swiss roll: latent(t) = scale * [t cos t, t sin t] + eps, y = T latent, with t
/// uniform in arc length over [t_min, t_max].
struct SwissRollSpec {
  std::size_t M = 10000;
  double t_min = 1.5 * std::numbers::pi;
  double t_max = 4.5 * std::numbers::pi;
  double scale = 0.125;
  double noise_std = 0.1;
  Eigen::Matrix2d rotation = rotation_matrix(std::numbers::pi / 4.0);
  std::uint64_t seed = 0;

  static Eigen::Matrix2d rotation_matrix(double angle);
  /// Throws ConfigError on an empty or inverted t range, negative noise, or a
  /// rotation whose rows are not orthonormal to 1e-12.
  void validate() const;
  std::string params_json() const;
};

/// Arc length of the scaled spiral from 0 to t: scale/2 * (t sqrt(1+t^2) + asinh t).
double swiss_roll_arc_length(double t, double scale);
/// Inverse of swiss_roll_arc_length on [t_lo, t_hi], by bisection to 1e-12.
double swiss_roll_parameter_at(double arc_length, double scale, double t_lo, double t_hi);
/// Noise-free latent point at parameter t.
Eigen::Vector2d swiss_roll_point(double t, double scale);

Dataset sample_swiss_roll(const SwissRollSpec& spec);

}  // namespace ebipla
