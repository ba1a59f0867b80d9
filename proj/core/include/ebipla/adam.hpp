#pragma once

#include <cstdint>

#include "ebipla/types.hpp"

namespace ebipla {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Multiplicative learning-rate decay applied after every step (1 = constant).
  double decay = 1.0;
};

/// Bias-corrected Adam moments. `t` counts completed steps.
struct AdamState {
  AdamConfig config;
  Vector m;
  Vector v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(const AdamConfig& cfg, std::size_t size);

  /// Learning rate in effect for the next step.
  double current_lr() const;
};

/// One Adam step: params - lr * m_hat / (sqrt(v_hat) + eps). Updates `state` in place.
Vector adam_step(AdamState& state, const Vector& params, const Vector& grad);

enum class OptimizerKind { kAdam, kSgd };

/// Adam, or plain gradient descent (params - lr * grad) used as a test hook.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, const AdamConfig& config, std::size_t size);

  Vector step(const Vector& params, const Vector& grad);
  OptimizerKind kind() const { return kind_; }
  const AdamState& state() const { return state_; }

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  AdamState state_;
};

}  // namespace ebipla
