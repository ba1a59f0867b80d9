#include "ebipla/particles.hpp"

namespace ebipla {

ParticleCloud::ParticleCloud(std::size_t M, std::size_t N, std::size_t latent_dim)
    : M_(M), N_(N), d_(latent_dim), data_(Matrix::Zero(latent_dim, M * N)) {
  if (M == 0 || N == 0 || latent_dim == 0) {
    throw ConfigError("ParticleCloud: M, N and d_x must be positive");
  }
}

void ParticleCloud::replicate(std::size_t factor) {
  if (factor == 0) throw ConfigError("ParticleCloud::replicate: factor must be positive");
  if (factor == 1) return;
  Matrix grown(d_, M_ * N_ * factor);
  for (std::size_t m = 0; m < M_; ++m) {
    for (std::size_t n = 0; n < N_; ++n) {
      for (std::size_t r = 0; r < factor; ++r) {
        grown.col(static_cast<Eigen::Index>(m * N_ * factor + n * factor + r)) =
            data_.col(index(m, n));
      }
    }
  }
  N_ *= factor;
  data_ = std::move(grown);
}

}  // namespace ebipla
