#include <gtest/gtest.h>

#include <cmath>

#include "ebipla/dataset.hpp"
#include "ebipla/model.hpp"
#include "ebipla/noise.hpp"
#include "ebipla/particles.hpp"
#include "ebipla/testbeds.hpp"

namespace ebipla {
namespace {

ParticleCloud cloud_of(std::size_t M, std::size_t N, const Matrix& points) {
  ParticleCloud cloud(M, N, static_cast<std::size_t>(points.rows()));
  cloud.data() = points;
  return cloud;
}

Dataset data_of(const Matrix& y) {
  Dataset d;
  d.y = y;
  return d;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(PhiGradAlpha, GaussianLocationSingleParticle) {
  GaussianLocationModel model(1);
  const auto cloud = cloud_of(1, 1, Matrix::Constant(1, 1, 2.0));
  const Vector g = phi_grad_alpha(model, vec({0.0}), cloud, Vector::Zero(1));
  EXPECT_DOUBLE_EQ(g(0), -2.0);
}

TEST(PhiGradAlpha, VanishesAtTheMode) {
  GaussianLocationModel model(2);
  Matrix pts(2, 3);
  pts.colwise() = vec({0.5, -1.0});
  const auto cloud = cloud_of(3, 1, pts);
  const Vector g = phi_grad_alpha(model, vec({0.5, -1.0}), cloud, Vector::Zero(2));
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(PhiGradAlpha, GaussianScaleSecondMoment) {
  GaussianScaleModel model(2);
  Matrix pts(2, 2);
  pts << 1.0, -1.0, 1.0, 1.0;  // ||x||^2 = 2 for both
  const auto cloud = cloud_of(2, 1, pts);
  const Vector alpha = GaussianScaleModel::alpha_for_scale(1.0);
  EXPECT_DOUBLE_EQ(model.prior_expectation(alpha).value()(0), 1.0);
  const Vector g = phi_grad_alpha(model, alpha, cloud, vec({1.0}));
  EXPECT_NEAR(g(0), 0.0, 1e-15);
}

TEST(PhiGradAlpha, RejectsNonFiniteEstimate) {
  GaussianLocationModel model(1);
  const auto cloud = cloud_of(1, 1, Matrix::Zero(1, 1));
  EXPECT_THROW(phi_grad_alpha(model, vec({0.0}), cloud, vec({NAN})), NumericalError);
}

TEST(PhiGradBeta, ScalarLinearDecoder) {
  LinearDecoder decoder(1, 1, 1.0, false);
  const auto cloud = cloud_of(1, 1, Matrix::Constant(1, 1, 1.0));
  const Vector g = phi_grad_beta(decoder, vec({0.0}), cloud, data_of(Matrix::Constant(1, 1, 1.0)));
  EXPECT_DOUBLE_EQ(g(0), -1.0);
}

TEST(PhiGradBeta, TwoParticleAverage) {
  LinearDecoder decoder(1, 1, 1.0, false);
  Matrix pts(1, 2);
  pts << 1.0, 2.0;
  const auto cloud = cloud_of(1, 2, pts);
  const Vector g = phi_grad_beta(decoder, vec({1.0}), cloud, data_of(Matrix::Zero(1, 1)));
  EXPECT_DOUBLE_EQ(g(0), 2.5);
}

TEST(PhiGradBeta, ZeroAtPerfectReconstruction) {
  LinearDecoder decoder(2, 3, 0.5, true);
  Matrix w(3, 2);
  w << 1, 2, 3, 4, 5, 6;
  const Vector beta = decoder.pack(w, vec({0.1, 0.2, 0.3}));
  Matrix x(2, 2);
  x << 0.3, -0.7, 1.1, 0.2;
  const auto cloud = cloud_of(2, 1, x);
  const Dataset data = data_of(decoder.generate(beta, x));
  EXPECT_NEAR(phi_grad_beta(decoder, beta, cloud, data).norm(), 0.0, 1e-13);
}

TEST(PhiGradX, HandEvaluation) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Theta theta{vec({0.0}), Vector()};
  EXPECT_DOUBLE_EQ(phi_grad_x(model, decoder, theta, vec({0.0}), vec({1.0}))(0), -1.0);
  EXPECT_EQ(phi_grad_x(model, decoder, Theta{vec({1.0}), Vector()}, vec({1.0}), vec({1.0})).norm(),
            0.0);
}

TEST(PhiGradX, MatchesFiniteDifferences) {
  GaussianLocationModel model(2, 2.0);
  LinearDecoder decoder(2, 3, 0.7, true);
  NoiseStream noise(5);
  Vector beta(decoder.param_dim()), alpha(2), x(2), y(3);
  noise.normal({.m = 0}, {beta.data(), static_cast<std::size_t>(beta.size())});
  noise.normal({.m = 1}, {alpha.data(), 2});
  noise.normal({.m = 2}, {x.data(), 2});
  noise.normal({.m = 3}, {y.data(), 3});
  const Theta theta{alpha, beta};
  const auto f = [&](const Vector& p) { return model.u(alpha, p) + decoder.v(beta, p, y); };
  const auto g = [&](const Vector& p) { return phi_grad_x(model, decoder, theta, p, y); };
  EXPECT_LT(finite_diff_check(f, g, x, 1e-5), 1e-5);

  const auto fb = [&](const Vector& b) { return decoder.v(b, x, y); };
  const auto gb = [&](const Vector& b) { return decoder.grad_beta_v(b, x, y); };
  EXPECT_LT(finite_diff_check(fb, gb, beta, 1e-5), 1e-5);
}

TEST(FiniteDiff, QuadraticIsExact) {
  const auto f = [](const Vector& p) { return 0.5 * p.squaredNorm(); };
  const auto g = [](const Vector& p) { return Vector(p); };
  EXPECT_LT(finite_diff_check(f, g, vec({1.0}), 1e-5), 1e-9);
  const auto c = [](const Vector&) { return 3.0; };
  const auto z = [](const Vector& p) { return Vector(Vector::Zero(p.size())); };
  EXPECT_EQ(finite_diff_check(c, z, vec({1.0, 2.0}), 1e-5), 0.0);
}

TEST(Compatibility, DimensionMismatchThrows) {
  GaussianLocationModel model(2);
  IdentityDecoder decoder(3, 1.0);
  EXPECT_THROW(check_compatible(model, decoder, Theta{Vector::Zero(2), Vector()}), DimensionError);
}

}  // namespace
}  // namespace ebipla
