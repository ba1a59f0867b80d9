#include <gtest/gtest.h>

#include <cmath>

#include "ebipla/dynamics.hpp"
#include "ebipla/mlp.hpp"
#include "ebipla/testbeds.hpp"

namespace ebipla {
namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

Dataset data_of(const Matrix& y) {
  Dataset d;
  d.y = y;
  return d;
}

double variance(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

TEST(Ula, ZeroNoiseStepIsEulerStep) {
  GaussianScaleModel model(1);
  const auto ids = iota_ids(1);
  const Matrix out = ula_run(model, GaussianScaleModel::alpha_for_scale(1.0), Matrix::Ones(1, 1),
                             ids, 0.1, 1, NoiseStream::zeros(), {});
  EXPECT_DOUBLE_EQ(out(0, 0), 0.9);
}

TEST(Ula, StationaryVarianceMatchesArOneOracle) {
  // x' = (1 - a gamma) x + sqrt(2 gamma) W has stationary variance 2 gamma / (1 - (1 - a gamma)^2).
  const double a = 1.0, gamma = 0.1;
  GaussianScaleModel model(1);
  const auto ids = iota_ids(100000);
  const Matrix x = ula_prior_sample(model, GaussianScaleModel::alpha_for_scale(a), ids, gamma, 200,
                                    NoiseStream(11));
  const double oracle = 2.0 * gamma / (1.0 - std::pow(1.0 - a * gamma, 2));
  EXPECT_NEAR(oracle, 1.0 / (a * (1.0 - a * gamma / 2.0)), 1e-12);
  EXPECT_NEAR(variance(x.row(0)) / oracle, 1.0, 0.02);
}

TEST(Ula, UnstableStepTripsDivergenceGuard) {
  GaussianScaleModel model(1);
  const auto ids = iota_ids(4);
  EXPECT_THROW(ula_prior_sample(model, GaussianScaleModel::alpha_for_scale(1.0), ids, 2.5, 500,
                                NoiseStream(1)),
               DivergenceError);
}

TEST(Ula, DrawsDoNotDependOnBatchComposition) {
  GaussianScaleModel model(2);
  const Vector alpha = GaussianScaleModel::alpha_for_scale(2.0);
  const auto all = iota_ids(10);
  const std::vector<std::uint32_t> some{3, 7};
  NoiseStream noise(5);
  const Matrix a = ula_prior_sample(model, alpha, all, 0.05, 20, noise);
  const Matrix b = ula_prior_sample(model, alpha, some, 0.05, 20, noise);
  EXPECT_EQ(a.col(3), b.col(0));
  EXPECT_EQ(a.col(7), b.col(1));
}

TEST(PosteriorStep, HandEvaluation) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  ParticleCloud cloud(1, 1, 1);
  cloud.data().setZero();
  posterior_particle_step(model, decoder, Theta{scalar(0.0), Vector()}, cloud,
                          data_of(Matrix::Ones(1, 1)), 0.1, NoiseStream::zeros(), 0);
  EXPECT_DOUBLE_EQ(cloud.data()(0, 0), 0.1);
}

TEST(PosteriorStep, ModeIsFixedPointWithoutNoise) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  ParticleCloud cloud(1, 2, 1);
  cloud.data().setConstant(1.0);  // mode of N(0,1) prior times N(x,1) likelihood at y = 2
  posterior_particle_step(model, decoder, Theta{scalar(0.0), Vector()}, cloud,
                          data_of(Matrix::Constant(1, 1, 2.0)), 0.3, NoiseStream::zeros(), 0);
  EXPECT_EQ(cloud.data()(0, 0), 1.0);
  EXPECT_EQ(cloud.data()(0, 1), 1.0);
}

TEST(PosteriorStep, OnlySelectedRowsMove) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  ParticleCloud cloud(3, 2, 1);
  cloud.data().setZero();
  const std::vector<std::uint32_t> selected{1};
  posterior_particle_step(model, decoder, Theta{scalar(0.0), Vector()}, cloud,
                          data_of(Matrix::Ones(1, 3)), 0.1, NoiseStream(1), 0, selected);
  EXPECT_EQ(cloud.row(0).norm(), 0.0);
  EXPECT_EQ(cloud.row(2).norm(), 0.0);
  EXPECT_GT(cloud.row(1).norm(), 0.0);
}

TEST(PosteriorStep, StationaryVarianceMatchesArOneOracle) {
  // Curvature c = 2 for unit prior and unit likelihood variance.
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const std::size_t M = 20000;
  ParticleCloud cloud(M, 1, 1);
  cloud.data().setZero();
  const Dataset data = data_of(Matrix::Zero(1, static_cast<Eigen::Index>(M)));
  const double h = 0.1;
  NoiseStream noise(17);
  for (std::uint32_t k = 0; k < 100; ++k) {
    posterior_particle_step(model, decoder, Theta{scalar(0.0), Vector()}, cloud, data, h, noise, k);
  }
  const double oracle = 2.0 * h / (1.0 - std::pow(1.0 - 2.0 * h, 2));
  EXPECT_NEAR(variance(cloud.data().row(0)) / oracle, 1.0, 0.04);
}

TEST(ThetaStep, ExactHandEvaluation) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  ParticleCloud cloud(1, 1, 1);
  cloud.data()(0, 0) = 2.0;
  const Theta next = theta_step_exact(model, decoder, Theta{scalar(0.0), Vector()}, cloud,
                                      data_of(Matrix::Zero(1, 1)), 0.5, NoiseStream::zeros(), 0);
  EXPECT_DOUBLE_EQ(next.alpha(0), 1.0);
  EXPECT_EQ(next.beta.size(), 0);
}

TEST(ThetaStep, BetaFixedAtZeroResidual) {
  GaussianLocationModel model(1);
  LinearDecoder decoder(1, 1, 1.0, false);
  ParticleCloud cloud(1, 1, 1);
  cloud.data()(0, 0) = 0.5;
  const Theta theta{scalar(0.5), scalar(3.0)};
  const Theta next = theta_step_exact(model, decoder, theta, cloud,
                                      data_of(Matrix::Constant(1, 1, 1.5)), 0.2,
                                      NoiseStream::zeros(), 0);
  EXPECT_EQ(next.beta(0), 3.0);
}

TEST(ThetaStep, InjectedNoiseVariance) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const std::size_t M = 2, N = 3;
  ParticleCloud cloud(M, N, 1);
  cloud.data().setZero();  // alpha = 0 = every particle, so the drift vanishes
  const Dataset data = data_of(Matrix::Zero(1, M));
  const double h = 0.3;
  NoiseStream noise(23);
  const std::size_t draws = 200000;
  Eigen::RowVectorXd d(static_cast<Eigen::Index>(draws));
  for (std::size_t k = 0; k < draws; ++k) {
    d(static_cast<Eigen::Index>(k)) =
        theta_step_exact(model, decoder, Theta{scalar(0.0), Vector()}, cloud, data, h, noise,
                         static_cast<std::uint32_t>(k))
            .alpha(0);
  }
  EXPECT_NEAR(variance(d) / (2.0 * h / static_cast<double>(M * N)), 1.0, 0.02);
}

TEST(ThetaStep, InexactDiffersFromExactByEstimate) {
  GaussianLocationModel model(2);
  IdentityDecoder decoder(2, 1.0);
  ParticleCloud cloud(3, 2, 2);
  cloud.data() = Matrix::Random(2, 6);
  const Dataset data = data_of(Matrix::Random(2, 3));
  const Theta theta{Vector::Constant(2, 0.25), Vector()};
  const Matrix prior = Matrix::Random(2, 3);
  const double h = 0.1;
  NoiseStream noise(3);
  const Theta exact = theta_step_exact(model, decoder, theta, cloud, data, h, noise, 4);
  const Theta inexact = theta_step_inexact(model, decoder, theta, cloud, data, h, prior, noise, 4);
  const Vector g = theta.alpha - prior.rowwise().mean();  // (1/M) sum grad_alpha U(prior_m)
  EXPECT_NEAR((inexact.alpha - exact.alpha - h * g).norm(), 0.0, 1e-14);
}

TEST(ThetaStep, ExactNeedsClosedForm) {
  MlpEnergy energy({{1, 4, 1}, Activation::kSiLU});
  IdentityDecoder decoder(1, 1.0);
  ParticleCloud cloud(1, 1, 1);
  cloud.data().setZero();
  const Theta theta{Vector::Zero(static_cast<Eigen::Index>(energy.param_dim())), Vector()};
  EXPECT_THROW(theta_step_exact(energy, decoder, theta, cloud, data_of(Matrix::Zero(1, 1)), 0.1,
                                NoiseStream(1), 0),
               ConfigError);
}

TEST(Zeta, LongChainsRecoverScaleExpectation) {
  GaussianScaleModel model(2);
  const ZetaStats s = measure_zeta_bias(model, GaussianScaleModel::alpha_for_scale(1.0), 0.01, 200,
                                        10000, NoiseStream(8));
  EXPECT_LT(std::abs(s.mean(0)), 0.05);
  EXPECT_GT(s.variance, 0.0);
}

TEST(Zeta, NoStepsGivesInitialisationMomentGap) {
  // g = a ||x||^2 / 2 with x ~ N(0, I) has mean a d / 2; the truth is d / 2.
  const double a = 4.0;
  const std::size_t d = 2;
  GaussianScaleModel model(d);
  const ZetaStats s = measure_zeta_bias(model, GaussianScaleModel::alpha_for_scale(a), 0.01, 0,
                                        10000, NoiseStream(9), 10);
  EXPECT_NEAR(s.mean(0), 0.5 * static_cast<double>(d) * (1.0 - a), 0.06);
}

TEST(Zeta, BiasShrinksWithChainLength) {
  GaussianScaleModel model(2);
  const Vector alpha = GaussianScaleModel::alpha_for_scale(4.0);
  double previous = INFINITY;
  for (std::size_t J : {5, 50, 200}) {
    const ZetaStats s = measure_zeta_bias(model, alpha, 0.01, J, 2000, NoiseStream(10), 10);
    EXPECT_LT(s.bias_norm, previous);
    previous = s.bias_norm;
  }
}

TEST(Zeta, NeedsTwoReplications) {
  GaussianScaleModel model(1);
  EXPECT_THROW(measure_zeta_bias(model, scalar(0.0), 0.01, 5, 1, NoiseStream(1)), ConfigError);
}

}  // namespace
}  // namespace ebipla
