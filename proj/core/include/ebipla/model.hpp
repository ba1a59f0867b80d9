#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "ebipla/types.hpp"

namespace ebipla {

class ParticleCloud;
struct Dataset;

/// Energies, input gradients and a weighted parameter gradient from one evaluation.
struct EnergyBatchEval {
  Vector energy;
  Matrix grad_x;
  Vector grad_alpha;  // weight * sum_c grad_alpha U(x_c)
};

/// Energy-based prior p_alpha(x) proportional to exp(-U_alpha(x)).
///
/// Batched entry points take points as the columns of a d_x x B matrix. The single-point
/// helpers forward to them.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t param_dim() const = 0;

  /// U_alpha at every column of `x`.
  virtual Vector energy(const Vector& alpha, const Matrix& x) const = 0;
  /// grad_x U_alpha at every column of `x`.
  virtual Matrix grad_x(const Vector& alpha, const Matrix& x) const = 0;
  /// sum_c weights[c] * grad_alpha U_alpha(x_c).
  virtual Vector weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                                     const Vector& weights) const = 0;

  /// E_{p_alpha}[grad_alpha U_alpha(X)] when known in closed form.
  virtual std::optional<Vector> prior_expectation(const Vector& /*alpha*/) const {
    return std::nullopt;
  }

  /// All three batched quantities at once; models with a shared forward pass override it.
  virtual EnergyBatchEval evaluate(const Vector& alpha, const Matrix& x, double weight) const;

  double u(const Vector& alpha, const Vector& x) const;
  Vector grad_alpha_u(const Vector& alpha, const Vector& x) const;
  Vector grad_x_u(const Vector& alpha, const Vector& x) const;
};

/// Gaussian decoder p_beta(y | x) = N(g_beta(x), sigma^2 I).
///
/// V_beta(x, y) = ||y - g_beta(x)||^2 / (2 sigma^2); the log-normaliser is dropped.
class Decoder {
 public:
  explicit Decoder(double sigma);
  virtual ~Decoder() = default;

  virtual std::string name() const = 0;
  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t data_dim() const = 0;
  virtual std::size_t param_dim() const = 0;

  /// g_beta at every column of `x`.
  virtual Matrix generate(const Vector& beta, const Matrix& x) const = 0;
  /// Column-wise J_x g_beta(x_c)^T cotangent_c.
  virtual Matrix pullback_x(const Vector& beta, const Matrix& x, const Matrix& cotangent) const = 0;
  /// sum_c J_beta g_beta(x_c)^T cotangent_c.
  virtual Vector pullback_beta(const Vector& beta, const Matrix& x,
                               const Matrix& cotangent) const = 0;

  double sigma() const { return sigma_; }

  /// V_beta(x_c, y_c) per column.
  Vector v(const Vector& beta, const Matrix& x, const Matrix& y) const;
  /// grad_x V_beta(x_c, y_c) per column.
  Matrix grad_x_v(const Vector& beta, const Matrix& x, const Matrix& y) const;
  /// sum_c weights[c] * grad_beta V_beta(x_c, y_c).
  Vector weighted_grad_beta(const Vector& beta, const Matrix& x, const Matrix& y,
                            const Vector& weights) const;

  double v(const Vector& beta, const Vector& x, const Vector& y) const;
  Vector grad_beta_v(const Vector& beta, const Vector& x, const Vector& y) const;
  Vector grad_x_v(const Vector& beta, const Vector& x, const Vector& y) const;

 private:
  double sigma_;
};

/// (1/MN) sum grad_alpha U(X^{m,n}) - prior_expectation_estimate.
Vector phi_grad_alpha(const EnergyModel& model, const Vector& alpha, const ParticleCloud& particles,
                      const Vector& prior_expectation_estimate);

/// (1/MN) sum grad_beta V(X^{m,n}, y_m).
Vector phi_grad_beta(const Decoder& decoder, const Vector& beta, const ParticleCloud& particles,
                     const Dataset& data);

/// grad_x U_alpha(x) + grad_x V_beta(x, y).
Vector phi_grad_x(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                  const Vector& x, const Vector& y);

/// Column-wise grad_x U + grad_x V for a batch of latents and their targets.
Matrix phi_grad_x_batch(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                        const Matrix& x, const Matrix& y);

/// Checks that `model` and `decoder` agree on d_x and that `theta` matches both.
void check_compatible(const EnergyModel& model, const Decoder& decoder, const Theta& theta);

using ScalarFunction = std::function<double(const Vector&)>;
using GradientFunction = std::function<Vector(const Vector&)>;

/// Max over coordinates of |fd_i - grad_i| / max(1, |grad_i|), where fd_i is the
/// central difference with the given step.
double finite_diff_check(const ScalarFunction& f, const GradientFunction& grad,
                         const Vector& point, double step);

}  // namespace ebipla
