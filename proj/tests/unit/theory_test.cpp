#include <gtest/gtest.h>

#include <cmath>

#include "ebipla/testbeds.hpp"
#include "ebipla/theory.hpp"

namespace ebipla {
namespace {

ConvexityProfile profile(double mu, double L, std::size_t M, std::size_t N) {
  ConvexityProfile p;
  p.mu = mu;
  p.smoothness = L;
  p.d_theta = 1;
  p.d_x = 1;
  p.M = M;
  p.N = N;
  return p;
}

Dataset data_of(std::initializer_list<double> values) {
  Dataset d;
  d.y.resize(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) d.y(0, i++) = v;
  return d;
}

TEST(Bound, ExactHandEvaluation) {
  const auto p = profile(1.0, 2.0, 10, 10);
  const double expected = 1.65 * 2.0 * std::sqrt(101.0 / 100.0) * std::sqrt(0.1) + 0.1;
  EXPECT_NEAR(bound_exact(p, 0.1, 100000, 5.0), expected, 1e-12);
  EXPECT_NEAR(expected, 1.1488, 1e-4);
}

TEST(Bound, InitialTermDominatesAtStart) {
  const auto p = profile(1.0, 2.0, 1000000, 1000);
  EXPECT_NEAR(bound_exact(p, 1e-12, 0, 3.0), 3.0, 1e-4);
}

TEST(Bound, StepRestriction) {
  const auto p = profile(1.0, 2.0, 10, 10);
  EXPECT_NO_THROW(check_step_size(p, 2.0 / 3.0));
  EXPECT_THROW(check_step_size(p, 2.0 / 3.0 + 1e-9), ConfigError);
  EXPECT_THROW(bound_exact(p, 0.7, 10, 1.0), ConfigError);
  EXPECT_THROW(check_step_size(p, 0.0), ConfigError);
}

TEST(Bound, InexactReducesToExactWithoutBias) {
  const auto p = profile(0.5, 3.0, 7, 3);
  EXPECT_DOUBLE_EQ(bound_inexact(p, {0.0, 0.0}, 0.2, 17, 2.0), bound_exact(p, 0.2, 17, 2.0));
}

TEST(Bound, InexactVarianceTerm) {
  const auto p = profile(1.0, 1.0, 1, 1);
  const double extra = c1_inexact(p, {0.0, 1.0}) - c1_exact(p);
  EXPECT_NEAR(extra, 1.0 / (1.65 * std::sqrt(2.0) + 1.0), 1e-12);
  EXPECT_NEAR(extra, 0.2999, 1e-4);
}

TEST(Bound, BiasTermVanishesWithManyParticles) {
  const BiasProfile bias{0.5, 0.0};
  const double small = c2_inexact(profile(1.0, 2.0, 10, 10), bias) / 10.0;
  const double large = c2_inexact(profile(1.0, 2.0, 10000, 100), bias) / 1000.0;
  EXPECT_LT(large, small / 50.0);
  EXPECT_DOUBLE_EQ(c2_inexact(profile(2.0, 2.0, 1, 1), bias), 0.25 + std::sqrt(0.5));
}

TEST(Envelope, ShrinksBySqrtTwo) {
  const double a = concentration_envelope(profile(0.4, 2.0, 50, 4));
  const double b = concentration_envelope(profile(0.4, 2.0, 50, 8));
  EXPECT_NEAR(a / b, std::sqrt(2.0), 1e-12);
}

TEST(GaussianLocationProfile, UnitVarianceEigenvalues) {
  const auto g = profile_of_gaussian_location(data_of({1.0, 3.0}), 4);
  EXPECT_NEAR(g.profile.mu, (3.0 - std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(g.profile.smoothness, (3.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(g.profile.mu, 0.38197, 1e-5);
  EXPECT_DOUBLE_EQ(g.theta_star.alpha(0), 2.0);
  EXPECT_EQ(g.profile.M, 2u);
  EXPECT_EQ(g.profile.N, 4u);
}

TEST(GaussianLocationProfile, SymmetricDataGivesZero) {
  const auto g = profile_of_gaussian_location(data_of({-1.7, 1.7}), 1, 2.0, 0.5);
  EXPECT_NEAR(g.theta_star.alpha(0), 0.0, 1e-15);
}

TEST(W2Init, SumOfTerms) {
  const auto p = profile(1.0, 2.0, 4, 1);
  Theta a{Vector::Constant(1, 1.0), Vector()};
  Theta b{Vector::Constant(1, 4.0), Vector()};
  EXPECT_NEAR(w2_init_overestimate(p, a, b, 0.5), 3.0 + 0.5 + 0.5, 1e-12);
}

class Rescaling : public ::testing::Test {
 protected:
  GaussianLocationModel model{1};
  IdentityDecoder decoder{1, 1.0};
  Dataset data = data_of({0.5, 1.5, -0.3, 2.2});
  Theta theta0{Vector::Constant(1, -1.0), Vector()};
};

TEST_F(Rescaling, SystemsAgree) {
  RescalingConfig c;
  c.N = 4;
  c.steps = 100;
  c.seed = 3;
  EXPECT_LT(rescaling_equivalence_check(model, decoder, data, theta0, c), 1e-10);
}

TEST_F(Rescaling, SingleParticleIsBitwise) {
  RescalingConfig c;
  c.N = 1;
  c.seed = 3;
  Dataset one = data_of({0.7});
  EXPECT_EQ(rescaling_equivalence_check(model, decoder, one, theta0, c), 0.0);
}

TEST_F(Rescaling, DesynchronisedNoiseIsDetected) {
  RescalingConfig c;
  c.desynchronize = true;
  EXPECT_GT(rescaling_equivalence_check(model, decoder, data, theta0, c), 1e-3);
}

TEST(Concentration, ErrorDecreasesWithN) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  Dataset data;
  data.y.resize(1, 50);
  NoiseStream(1).normal({.role = NoiseRole::kData}, {data.y.data(), 50});
  const auto g = profile_of_gaussian_location(data, 1);
  ConcentrationConfig c;
  c.N_values = {1, 16};
  c.K = 600;
  c.burn_in = 300;
  c.seeds = 6;
  c.cloud_radius = g.cloud_radius;
  const auto rows = pi_theta_concentration_check(model, decoder, data, Theta{Vector::Zero(1), Vector()},
                                                 g.theta_star, g.profile, c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[1].rms_error, rows[0].rms_error);
  EXPECT_NEAR(rows[0].envelope / rows[1].envelope, 4.0, 1e-12);
  for (const auto& r : rows) EXPECT_LE(r.rms_error, r.bound);
}

}  // namespace
}  // namespace ebipla
