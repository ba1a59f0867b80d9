#pragma once

#include <cstddef>

#include "ebipla/types.hpp"

namespace ebipla {

/// M x N posterior particles of dimension d_x. Column m * N + n of `data()` holds
/// particle X^{m,n}, so the N particles of data point m are contiguous.
class ParticleCloud {
 public:
  ParticleCloud() = default;
  ParticleCloud(std::size_t M, std::size_t N, std::size_t latent_dim);

  std::size_t M() const { return M_; }
  std::size_t N() const { return N_; }
  std::size_t latent_dim() const { return d_; }
  std::size_t size() const { return M_ * N_; }

  Matrix& data() { return data_; }
  const Matrix& data() const { return data_; }

  auto particle(std::size_t m, std::size_t n) { return data_.col(index(m, n)); }
  auto particle(std::size_t m, std::size_t n) const { return data_.col(index(m, n)); }
  auto row(std::size_t m) { return data_.middleCols(static_cast<Eigen::Index>(m * N_), N_); }
  auto row(std::size_t m) const { return data_.middleCols(static_cast<Eigen::Index>(m * N_), N_); }

  Eigen::Index index(std::size_t m, std::size_t n) const {
    return static_cast<Eigen::Index>(m * N_ + n);
  }

  bool all_finite() const { return data_.allFinite(); }

  /// Copies each particle `factor` times so that N becomes N * factor; copy r of
  /// particle (m, n) lands at (m, n * factor + r).
  void replicate(std::size_t factor);

 private:
  std::size_t M_ = 0;
  std::size_t N_ = 0;
  std::size_t d_ = 0;
  Matrix data_;
};

}  // namespace ebipla
