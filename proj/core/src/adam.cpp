#include "ebipla/adam.hpp"

#include <cmath>

namespace ebipla {

AdamState::AdamState(const AdamConfig& cfg, std::size_t size)
    : config(cfg),
      m(Vector::Zero(static_cast<Eigen::Index>(size))),
      v(Vector::Zero(static_cast<Eigen::Index>(size))) {
  if (!(cfg.lr > 0.0)) throw ConfigError("Adam: lr must be positive");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("Adam: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(cfg.eps >= 0.0)) throw ConfigError("Adam: eps must be non-negative");
  if (!(cfg.decay > 0.0 && cfg.decay <= 1.0)) throw ConfigError("Adam: decay must lie in (0, 1]");
}

double AdamState::current_lr() const {
  return config.lr * std::pow(config.decay, static_cast<double>(t));
}

Vector adam_step(AdamState& state, const Vector& params, const Vector& grad) {
  require_dim("adam params", state.m.size(), params.size());
  require_dim("adam grad", state.m.size(), grad.size());
  const auto& c = state.config;
  const double lr = state.current_lr();
  state.t += 1;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  const auto m_hat = state.m.array() / correction1;
  const auto v_hat = state.v.array() / correction2;
  Vector out = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double denom = std::sqrt(v_hat(i)) + c.eps;
    // eps = 0 with a zero second moment: the gradient has always been zero, so no move.
    if (denom > 0.0) out(i) -= lr * m_hat(i) / denom;
  }
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, const AdamConfig& config, std::size_t size)
    : kind_(kind), state_(config, size) {}

Vector Optimizer::step(const Vector& params, const Vector& grad) {
  if (kind_ == OptimizerKind::kAdam) return adam_step(state_, params, grad);
  require_dim("sgd grad", params.size(), grad.size());
  const double lr = state_.current_lr();
  state_.t += 1;
  return params - lr * grad;
}

}  // namespace ebipla
