#pragma once

#include <cmath>

#include "ebipla/model.hpp"

namespace ebipla {

/// U_alpha(x) = ||x - alpha||^2 / (2 v) with prior variance v. Z_alpha does not depend on
/// alpha, so the prior expectation of grad_alpha U is zero.
class GaussianLocationModel final : public EnergyModel {
 public:
  explicit GaussianLocationModel(std::size_t latent_dim, double prior_var = 1.0);

  std::string name() const override { return "gaussian_location"; }
  std::size_t latent_dim() const override { return d_; }
  std::size_t param_dim() const override { return d_; }
  double prior_var() const { return prior_var_; }

  Vector energy(const Vector& alpha, const Matrix& x) const override;
  Matrix grad_x(const Vector& alpha, const Matrix& x) const override;
  Vector weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                             const Vector& weights) const override;
  std::optional<Vector> prior_expectation(const Vector& alpha) const override;

 private:
  std::size_t d_;
  double prior_var_;
};

/// U(x) = a ||x||^2 / 2 with scale a = exp(alpha), alpha scalar. p_a = N(0, I/a), so
/// E[grad_a U] = d/(2a) and, after the chain rule, E[grad_alpha U] = a * d/(2a) = d/2.
class GaussianScaleModel final : public EnergyModel {
 public:
  explicit GaussianScaleModel(std::size_t latent_dim);

  std::string name() const override { return "gaussian_scale"; }
  std::size_t latent_dim() const override { return d_; }
  std::size_t param_dim() const override { return 1; }

  static double scale(const Vector& alpha) { return std::exp(alpha(0)); }
  static Vector alpha_for_scale(double a);
  /// E_{p_a}[grad_a U_a(X)] = d/(2a).
  double expected_grad_scale(double a) const { return static_cast<double>(d_) / (2.0 * a); }

  Vector energy(const Vector& alpha, const Matrix& x) const override;
  Matrix grad_x(const Vector& alpha, const Matrix& x) const override;
  Vector weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                             const Vector& weights) const override;
  std::optional<Vector> prior_expectation(const Vector& alpha) const override;

 private:
  std::size_t d_;
};

/// g(x) = x with no trainable weights.
class IdentityDecoder final : public Decoder {
 public:
  IdentityDecoder(std::size_t dim, double sigma);

  std::string name() const override { return "identity"; }
  std::size_t latent_dim() const override { return d_; }
  std::size_t data_dim() const override { return d_; }
  std::size_t param_dim() const override { return 0; }

  Matrix generate(const Vector& beta, const Matrix& x) const override;
  Matrix pullback_x(const Vector& beta, const Matrix& x, const Matrix& cotangent) const override;
  Vector pullback_beta(const Vector& beta, const Matrix& x,
                       const Matrix& cotangent) const override;

 private:
  std::size_t d_;
};

/// g_beta(x) = W x (+ b). Layout of beta: W in column-major order (d_y x d_x), then b.
class LinearDecoder final : public Decoder {
 public:
  LinearDecoder(std::size_t latent_dim, std::size_t data_dim, double sigma, bool bias = true);

  std::string name() const override { return "linear"; }
  std::size_t latent_dim() const override { return dx_; }
  std::size_t data_dim() const override { return dy_; }
  std::size_t param_dim() const override { return dx_ * dy_ + (bias_ ? dy_ : 0); }
  bool has_bias() const { return bias_; }

  Matrix generate(const Vector& beta, const Matrix& x) const override;
  Matrix pullback_x(const Vector& beta, const Matrix& x, const Matrix& cotangent) const override;
  Vector pullback_beta(const Vector& beta, const Matrix& x,
                       const Matrix& cotangent) const override;

  /// beta for a given weight matrix and (optional) bias.
  Vector pack(const Matrix& weight, const Vector& bias) const;

 private:
  Eigen::Map<const Matrix> weight(const Vector& beta) const;

  std::size_t dx_;
  std::size_t dy_;
  bool bias_;
};

}  // namespace ebipla
