#include "ebipla/model.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "ebipla/dataset.hpp"
#include "ebipla/particles.hpp"

namespace ebipla {

DimensionError::DimensionError(std::string axis, std::size_t expected, std::size_t actual)
    : Error("dimension mismatch on axis '" + axis + "': expected " + std::to_string(expected) +
            ", got " + std::to_string(actual)),
      axis_(std::move(axis)),
      expected_(expected),
      actual_(actual) {}

EnergyBatchEval EnergyModel::evaluate(const Vector& alpha, const Matrix& x, double weight) const {
  EnergyBatchEval out;
  out.energy = energy(alpha, x);
  out.grad_x = grad_x(alpha, x);
  out.grad_alpha = weighted_grad_alpha(alpha, x, Vector::Constant(x.cols(), weight));
  return out;
}

double EnergyModel::u(const Vector& alpha, const Vector& x) const {
  return energy(alpha, x)(0);
}

Vector EnergyModel::grad_alpha_u(const Vector& alpha, const Vector& x) const {
  return weighted_grad_alpha(alpha, x, Vector::Ones(1));
}

Vector EnergyModel::grad_x_u(const Vector& alpha, const Vector& x) const {
  return grad_x(alpha, x).col(0);
}

Decoder::Decoder(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("Decoder: sigma must be positive and finite");
  }
}

Vector Decoder::v(const Vector& beta, const Matrix& x, const Matrix& y) const {
  require_dim("decoder batch", x.cols(), y.cols());
  const Matrix residual = y - generate(beta, x);
  return residual.colwise().squaredNorm().transpose() / (2.0 * sigma_ * sigma_);
}

Matrix Decoder::grad_x_v(const Vector& beta, const Matrix& x, const Matrix& y) const {
  require_dim("decoder batch", x.cols(), y.cols());
  const Matrix cotangent = (generate(beta, x) - y) / (sigma_ * sigma_);
  return pullback_x(beta, x, cotangent);
}

Vector Decoder::weighted_grad_beta(const Vector& beta, const Matrix& x, const Matrix& y,
                                   const Vector& weights) const {
  require_dim("decoder batch", x.cols(), y.cols());
  require_dim("weights", x.cols(), weights.size());
  Matrix cotangent = (generate(beta, x) - y) / (sigma_ * sigma_);
  cotangent *= weights.asDiagonal();
  return pullback_beta(beta, x, cotangent);
}

double Decoder::v(const Vector& beta, const Vector& x, const Vector& y) const {
  return v(beta, Matrix(x), Matrix(y))(0);
}

Vector Decoder::grad_beta_v(const Vector& beta, const Vector& x, const Vector& y) const {
  return weighted_grad_beta(beta, x, y, Vector::Ones(1));
}

Vector Decoder::grad_x_v(const Vector& beta, const Vector& x, const Vector& y) const {
  return grad_x_v(beta, Matrix(x), Matrix(y)).col(0);
}

void check_compatible(const EnergyModel& model, const Decoder& decoder, const Theta& theta) {
  require_dim("latent (decoder vs energy)", model.latent_dim(), decoder.latent_dim());
  require_dim("alpha", model.param_dim(), theta.alpha.size());
  require_dim("beta", decoder.param_dim(), theta.beta.size());
}

Vector phi_grad_alpha(const EnergyModel& model, const Vector& alpha, const ParticleCloud& particles,
                      const Vector& prior_expectation_estimate) {
  require_dim("alpha", model.param_dim(), alpha.size());
  require_dim("particle latent", model.latent_dim(), particles.latent_dim());
  require_dim("prior expectation", model.param_dim(), prior_expectation_estimate.size());
  if (!prior_expectation_estimate.allFinite()) {
    throw NumericalError("phi_grad_alpha: prior expectation estimate is not finite");
  }
  const auto count = static_cast<Eigen::Index>(particles.size());
  const Vector weights = Vector::Constant(count, 1.0 / static_cast<double>(count));
  return detail::blocked_grad_alpha(model, alpha, particles.data(), weights) -
         prior_expectation_estimate;
}

Vector phi_grad_beta(const Decoder& decoder, const Vector& beta, const ParticleCloud& particles,
                     const Dataset& data) {
  require_dim("beta", decoder.param_dim(), beta.size());
  require_dim("M (data vs particles)", data.size(), particles.M());
  require_dim("particle latent", decoder.latent_dim(), particles.latent_dim());
  require_dim("data dim", decoder.data_dim(), data.dim());
  if (decoder.param_dim() == 0) return Vector();
  // Targets aligned with particle columns.
  Matrix targets(data.dim(), particles.size());
  for (std::size_t m = 0; m < particles.M(); ++m) {
    targets.middleCols(particles.index(m, 0), particles.N()).colwise() =
        data.y.col(static_cast<Eigen::Index>(m));
  }
  const auto count = static_cast<Eigen::Index>(particles.size());
  const Vector weights = Vector::Constant(count, 1.0 / static_cast<double>(count));
  return detail::blocked_grad_beta(decoder, beta, particles.data(), targets, weights);
}

Matrix phi_grad_x_batch(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                        const Matrix& x, const Matrix& y) {
  require_dim("latent", model.latent_dim(), x.rows());
  require_dim("data dim", decoder.data_dim(), y.rows());
  require_dim("batch", x.cols(), y.cols());
  return model.grad_x(theta.alpha, x) + decoder.grad_x_v(theta.beta, x, y);
}

Vector phi_grad_x(const EnergyModel& model, const Decoder& decoder, const Theta& theta,
                  const Vector& x, const Vector& y) {
  return phi_grad_x_batch(model, decoder, theta, x, y).col(0);
}

double finite_diff_check(const ScalarFunction& f, const GradientFunction& grad,
                         const Vector& point, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_check: step must be positive");
  const Vector analytic = grad(point);
  require_dim("gradient", point.size(), analytic.size());
  double worst = 0.0;
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe(i) = point(i) + step;
    const double up = f(probe);
    probe(i) = point(i) - step;
    const double down = f(probe);
    probe(i) = point(i);
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_diff_check: non-finite function value at coordinate " +
                           std::to_string(i));
    }
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - analytic(i)) / std::max(1.0, std::abs(analytic(i))));
  }
  return worst;
}

}  // namespace ebipla
