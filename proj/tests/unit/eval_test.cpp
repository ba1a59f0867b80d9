#include <gtest/gtest.h>

#include <cmath>

#include "ebipla/eval.hpp"
#include "ebipla/testbeds.hpp"

namespace ebipla {
namespace {

// Triple-loop reference for the unbiased estimator.
double brute_force_mmd(const Matrix& p, const Matrix& q, double bandwidth) {
  const auto k = [&](const Vector& a, const Vector& b) {
    return std::exp(-bandwidth * (a - b).squaredNorm());
  };
  const auto m = p.cols(), n = q.cols();
  double pp = 0, qq = 0, pq = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) pp += k(p.col(i), p.col(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) qq += k(q.col(i), q.col(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) pq += k(p.col(i), q.col(j));
  return pp / static_cast<double>(m * (m - 1)) + qq / static_cast<double>(n * (n - 1)) -
         2.0 * pq / static_cast<double>(m * n);
}

Matrix row(std::initializer_list<double> v) {
  Matrix out(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(0, i++) = x;
  return out;
}

TEST(Mmd, WorkedExamples) {
  EXPECT_NEAR(mmd_unbiased(row({0, 1}), row({0, 1})), std::exp(-0.1) - 1.0, 1e-12);
  const double far = 2.0 * std::exp(-0.1) -
                     0.5 * (std::exp(-10.0) + std::exp(-12.1) + std::exp(-8.1) + std::exp(-10.0));
  EXPECT_NEAR(mmd_unbiased(row({0, 1}), row({10, 11})), far, 1e-12);
  EXPECT_NEAR(far, 1.8095, 1e-4);
}

TEST(Mmd, MatchesBruteForce) {
  NoiseStream noise(1);
  for (std::uint32_t r = 0; r < 20; ++r) {
    const Eigen::Index d = 1 + r % 3, m = 2 + (r * 7) % 40, n = 2 + (r * 11) % 45;
    Matrix p(d, m), q(d, n);
    noise.normal({.k = r, .m = 0}, {p.data(), static_cast<std::size_t>(p.size())});
    noise.normal({.k = r, .m = 1}, {q.data(), static_cast<std::size_t>(q.size())});
    q.array() += 0.3;
    EXPECT_NEAR(mmd_unbiased(p, q, {0.25}), brute_force_mmd(p, q, 0.25), 1e-12);
  }
}

TEST(Mmd, SameDistributionAveragesNearZero) {
  NoiseStream noise(2);
  double total = 0.0;
  for (std::uint32_t r = 0; r < 10; ++r) {
    Matrix p(2, 1000), q(2, 1000);
    noise.normal({.k = r, .m = 0}, {p.data(), 2000});
    noise.normal({.k = r, .m = 1}, {q.data(), 2000});
    total += mmd_unbiased(p, q);
  }
  EXPECT_LT(std::abs(total / 10.0), 0.01);
}

TEST(Mmd, RejectsTooFewPoints) {
  EXPECT_THROW(mmd_unbiased(row({0}), row({0, 1})), ConfigError);
}

TEST(Generate, ZeroWeightGeneratorGivesBias) {
  GaussianLocationModel model(2);
  LinearDecoder decoder(2, 3, 0.1, true);
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  const Theta theta{Vector::Zero(2), decoder.pack(Matrix::Zero(3, 2), b)};
  const Matrix s = generate_samples(model, decoder, theta, 50, 10, 0.1, NoiseStream(1));
  ASSERT_EQ(s.cols(), 50);
  for (Eigen::Index c = 0; c < s.cols(); ++c) EXPECT_EQ(s.col(c), b);
}

TEST(Generate, GaussianPriorMean) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Theta theta{Vector::Constant(1, 1.5), Vector()};
  const Matrix s = generate_samples(model, decoder, theta, 10000, 200, 0.05, NoiseStream(3));
  // ULA on N(1.5, 1) keeps the mean; the spread is about 1.
  EXPECT_NEAR(s.mean(), 1.5, 3.0 * 1.02 / 100.0);
}

TEST(Generate, LongChainsMatchModerateChains) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Theta theta{Vector::Constant(1, 0.5), Vector()};
  const Matrix a = generate_samples(model, decoder, theta, 2000, 500, 0.05, NoiseStream(4));
  const Matrix b = generate_samples(model, decoder, theta, 2000, 5000, 0.05, NoiseStream(5));
  EXPECT_LT(mmd_unbiased(a, b), 0.005);
}

TEST(ParameterError, Identities) {
  const Theta a{Vector::Zero(2), Vector::Zero(1)};
  Theta b = a;
  EXPECT_EQ(parameter_error(a, b), 0.0);
  b.beta(0) = 1.0;
  EXPECT_EQ(parameter_error(a, b), 1.0);
  const std::vector<double> ones{1, 1, 1, 1};
  EXPECT_EQ(rms(ones), 1.0);
}

TEST(MapLatent, QuadraticClosedForm) {
  // U = a ||x||^2 / 2, V = ||y - x||^2 / (2 s^2): x* = y / (1 + a s^2).
  GaussianScaleModel model(2);
  IdentityDecoder decoder(2, 0.5);
  const double a = 3.0;
  const Theta theta{GaussianScaleModel::alpha_for_scale(a), Vector()};
  Vector y(2);
  y << 1.0, -0.6;
  MapConfig config;
  config.iterations = 1000;
  config.adam.lr = 0.1;
  config.plateau_threshold = 0.0;
  const MapResult r = map_latent(model, decoder, theta, y, config, NoiseStream(6));
  EXPECT_LT((r.x - y / (1.0 + a * 0.25)).norm(), 1e-4);
  EXPECT_EQ(r.restart_objectives.size(), 4u);
}

TEST(MapLatent, DefaultsMirrorEvaluationProtocol) {
  const MapConfig c;
  EXPECT_EQ(c.restarts, 4u);
  EXPECT_EQ(c.iterations, 50u);
}

}  // namespace
}  // namespace ebipla
