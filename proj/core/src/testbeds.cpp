#include "ebipla/testbeds.hpp"

#include <cmath>

namespace ebipla {

GaussianLocationModel::GaussianLocationModel(std::size_t latent_dim, double prior_var)
    : d_(latent_dim), prior_var_(prior_var) {
  if (latent_dim == 0) throw ConfigError("GaussianLocationModel: latent_dim must be positive");
  if (!(prior_var > 0.0)) throw ConfigError("GaussianLocationModel: prior_var must be positive");
}

Vector GaussianLocationModel::energy(const Vector& alpha, const Matrix& x) const {
  require_dim("alpha", d_, alpha.size());
  require_dim("latent", d_, x.rows());
  return (x.colwise() - alpha).colwise().squaredNorm().transpose() / (2.0 * prior_var_);
}

Matrix GaussianLocationModel::grad_x(const Vector& alpha, const Matrix& x) const {
  require_dim("alpha", d_, alpha.size());
  require_dim("latent", d_, x.rows());
  return (x.colwise() - alpha) / prior_var_;
}

Vector GaussianLocationModel::weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                                                  const Vector& weights) const {
  require_dim("alpha", d_, alpha.size());
  require_dim("latent", d_, x.rows());
  require_dim("weights", x.cols(), weights.size());
  // sum_c w_c (alpha - x_c) / v
  return (weights.sum() * alpha - x * weights) / prior_var_;
}

std::optional<Vector> GaussianLocationModel::prior_expectation(const Vector& alpha) const {
  require_dim("alpha", d_, alpha.size());
  return Vector::Zero(static_cast<Eigen::Index>(d_));
}

GaussianScaleModel::GaussianScaleModel(std::size_t latent_dim) : d_(latent_dim) {
  if (latent_dim == 0) throw ConfigError("GaussianScaleModel: latent_dim must be positive");
}

Vector GaussianScaleModel::alpha_for_scale(double a) {
  if (!(a > 0.0)) throw ConfigError("GaussianScaleModel: scale must be positive");
  return Vector::Constant(1, std::log(a));
}

Vector GaussianScaleModel::energy(const Vector& alpha, const Matrix& x) const {
  require_dim("alpha", 1, alpha.size());
  require_dim("latent", d_, x.rows());
  return 0.5 * scale(alpha) * x.colwise().squaredNorm().transpose();
}

Matrix GaussianScaleModel::grad_x(const Vector& alpha, const Matrix& x) const {
  require_dim("alpha", 1, alpha.size());
  require_dim("latent", d_, x.rows());
  return scale(alpha) * x;
}

Vector GaussianScaleModel::weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                                               const Vector& weights) const {
  require_dim("alpha", 1, alpha.size());
  require_dim("latent", d_, x.rows());
  require_dim("weights", x.cols(), weights.size());
  // dU/dalpha = a * dU/da = a ||x||^2 / 2
  const double a = scale(alpha);
  return Vector::Constant(1, 0.5 * a * x.colwise().squaredNorm().dot(weights));
}

std::optional<Vector> GaussianScaleModel::prior_expectation(const Vector& alpha) const {
  require_dim("alpha", 1, alpha.size());
  const double a = scale(alpha);
  return Vector::Constant(1, a * expected_grad_scale(a));
}

IdentityDecoder::IdentityDecoder(std::size_t dim, double sigma) : Decoder(sigma), d_(dim) {
  if (dim == 0) throw ConfigError("IdentityDecoder: dim must be positive");
}

Matrix IdentityDecoder::generate(const Vector& beta, const Matrix& x) const {
  require_dim("beta", 0, beta.size());
  require_dim("latent", d_, x.rows());
  return x;
}

Matrix IdentityDecoder::pullback_x(const Vector&, const Matrix& x, const Matrix& cotangent) const {
  require_dim("latent", d_, x.rows());
  return cotangent;
}

Vector IdentityDecoder::pullback_beta(const Vector&, const Matrix&, const Matrix&) const {
  return Vector();
}

LinearDecoder::LinearDecoder(std::size_t latent_dim, std::size_t data_dim, double sigma, bool bias)
    : Decoder(sigma), dx_(latent_dim), dy_(data_dim), bias_(bias) {
  if (latent_dim == 0 || data_dim == 0) {
    throw ConfigError("LinearDecoder: dimensions must be positive");
  }
}

Eigen::Map<const Matrix> LinearDecoder::weight(const Vector& beta) const {
  require_dim("beta", param_dim(), beta.size());
  return {beta.data(), static_cast<Eigen::Index>(dy_), static_cast<Eigen::Index>(dx_)};
}

Matrix LinearDecoder::generate(const Vector& beta, const Matrix& x) const {
  require_dim("latent", dx_, x.rows());
  Matrix out = weight(beta) * x;
  if (bias_) out.colwise() += beta.tail(static_cast<Eigen::Index>(dy_));
  return out;
}

Matrix LinearDecoder::pullback_x(const Vector& beta, const Matrix& x,
                                 const Matrix& cotangent) const {
  require_dim("latent", dx_, x.rows());
  require_dim("cotangent", dy_, cotangent.rows());
  return weight(beta).transpose() * cotangent;
}

Vector LinearDecoder::pullback_beta(const Vector& beta, const Matrix& x,
                                    const Matrix& cotangent) const {
  require_dim("beta", param_dim(), beta.size());
  require_dim("latent", dx_, x.rows());
  require_dim("cotangent", dy_, cotangent.rows());
  Vector out(static_cast<Eigen::Index>(param_dim()));
  Eigen::Map<Matrix>(out.data(), static_cast<Eigen::Index>(dy_), static_cast<Eigen::Index>(dx_)) =
      cotangent * x.transpose();
  if (bias_) out.tail(static_cast<Eigen::Index>(dy_)) = cotangent.rowwise().sum();
  return out;
}

Vector LinearDecoder::pack(const Matrix& weight, const Vector& bias) const {
  require_dim("weight rows", dy_, weight.rows());
  require_dim("weight cols", dx_, weight.cols());
  Vector out(static_cast<Eigen::Index>(param_dim()));
  Eigen::Map<Matrix>(out.data(), weight.rows(), weight.cols()) = weight;
  if (bias_) {
    require_dim("bias", dy_, bias.size());
    out.tail(static_cast<Eigen::Index>(dy_)) = bias;
  }
  return out;
}

}  // namespace ebipla
