#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>

#include "ebipla/errors.hpp"

namespace ebipla {

using Vector = Eigen::VectorXd;
/// Batches of points are stored column-wise: one column per point.
using Matrix = Eigen::MatrixXd;

/// Model parameters: energy-prior weights `alpha` and decoder weights `beta`.
/// A decoder without trainable weights has an empty `beta`.
struct Theta {
  Vector alpha;
  Vector beta;

  std::size_t size() const { return static_cast<std::size_t>(alpha.size() + beta.size()); }
  Vector flat() const;
  bool all_finite() const { return alpha.allFinite() && beta.allFinite(); }
};

inline Vector Theta::flat() const {
  Vector out(alpha.size() + beta.size());
  out << alpha, beta;
  return out;
}

template <class Expected, class Actual>
void require_dim(const char* axis, Expected expected, Actual actual) {
  const auto e = static_cast<std::size_t>(expected);
  const auto a = static_cast<std::size_t>(actual);
  if (e != a) throw DimensionError(axis, e, a);
}

}  // namespace ebipla
