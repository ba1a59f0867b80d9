#pragma once

#include <cstddef>
#include <vector>

#include "ebipla/model.hpp"
#include "ebipla/parallel.hpp"

namespace ebipla::detail {

inline constexpr std::size_t kColumnBlock = 256;

/// sum_c w_c grad_alpha U(x_c) over fixed column blocks, reduced in block order.
inline Vector blocked_grad_alpha(const EnergyModel& model, const Vector& alpha, const Matrix& x,
                                 const Vector& weights) {
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), kColumnBlock};
  std::vector<Vector> partial(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    partial[c] = model.weighted_grad_alpha(alpha, x.middleCols(b, e - b), weights.segment(b, e - b));
  });
  Vector total = Vector::Zero(static_cast<Eigen::Index>(model.param_dim()));
  for (const auto& p : partial) total += p;
  return total;
}

inline Vector blocked_grad_beta(const Decoder& decoder, const Vector& beta, const Matrix& x,
                                const Matrix& y, const Vector& weights) {
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), kColumnBlock};
  std::vector<Vector> partial(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    partial[c] = decoder.weighted_grad_beta(beta, x.middleCols(b, e - b), y.middleCols(b, e - b),
                                            weights.segment(b, e - b));
  });
  Vector total = Vector::Zero(static_cast<Eigen::Index>(decoder.param_dim()));
  for (const auto& p : partial) total += p;
  return total;
}

/// Column-wise joint gradient grad_x U + grad_x V, blocked and parallel.
inline Matrix blocked_grad_x(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                             const Matrix& x, const Matrix& y) {
  Matrix out(x.rows(), x.cols());
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), kColumnBlock};
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    out.middleCols(b, e - b) =
        phi_grad_x_batch(model, decoder, theta, x.middleCols(b, e - b), y.middleCols(b, e - b));
  });
  return out;
}

}  // namespace ebipla::detail
