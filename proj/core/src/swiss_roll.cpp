#include "ebipla/swiss_roll.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ebipla/noise.hpp"

namespace ebipla {

Eigen::Matrix2d SwissRollSpec::rotation_matrix(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

void SwissRollSpec::validate() const {
  if (M == 0) throw ConfigError("swiss roll: M must be positive");
  if (!(t_max > t_min) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
    throw ConfigError("swiss roll: degenerate t range [" + std::to_string(t_min) + ", " +
                      std::to_string(t_max) + "]");
  }
  if (!(t_min >= 0.0)) throw ConfigError("swiss roll: t_min must be non-negative");
  if (!(scale > 0.0)) throw ConfigError("swiss roll: scale must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("swiss roll: noise_std must be non-negative");
  const Eigen::Matrix2d gram = rotation * rotation.transpose();
  if (!rotation.allFinite() || (gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("swiss roll: rotation rows are not orthonormal");
  }
}

std::string SwissRollSpec::params_json() const {
  const nlohmann::json j = {
      {"M", M},
      {"t_min", t_min},
      {"t_max", t_max},
      {"scale", scale},
      {"noise_std", noise_std},
      {"rotation", {{rotation(0, 0), rotation(0, 1)}, {rotation(1, 0), rotation(1, 1)}}},
  };
  return j.dump();
}

double swiss_roll_arc_length(double t, double scale) {
  return 0.5 * scale * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
}

double swiss_roll_parameter_at(double arc_length, double scale, double t_lo, double t_hi) {
  double lo = t_lo;
  double hi = t_hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (swiss_roll_arc_length(mid, scale) < arc_length) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Eigen::Vector2d swiss_roll_point(double t, double scale) {
  return scale * Eigen::Vector2d(t * std::cos(t), t * std::sin(t));
}

Dataset sample_swiss_roll(const SwissRollSpec& spec) {
  spec.validate();
  const NoiseStream noise(spec.seed);
  const double s_lo = swiss_roll_arc_length(spec.t_min, spec.scale);
  const double s_hi = swiss_roll_arc_length(spec.t_max, spec.scale);

  Dataset out;
  out.y.resize(2, static_cast<Eigen::Index>(spec.M));
  Matrix latents(2, static_cast<Eigen::Index>(spec.M));
  for (std::size_t m = 0; m < spec.M; ++m) {
    double u = 0.0;
    Eigen::Vector2d eps;
    const auto index = static_cast<std::uint32_t>(m);
    noise.uniform({.role = NoiseRole::kData, .j = 0, .m = index}, {&u, 1});
    noise.normal({.role = NoiseRole::kData, .j = 1, .m = index}, {eps.data(), 2});
    const double t = swiss_roll_parameter_at(s_lo + u * (s_hi - s_lo), spec.scale, spec.t_min, spec.t_max);
    const Eigen::Vector2d latent = swiss_roll_point(t, spec.scale) + spec.noise_std * eps;
    latents.col(static_cast<Eigen::Index>(m)) = latent;
    out.y.col(static_cast<Eigen::Index>(m)) = spec.rotation * latent;
  }
  out.latents = std::move(latents);
  out.provenance = {"swiss_roll", spec.seed, spec.params_json()};
  return out;
}

}  // namespace ebipla
