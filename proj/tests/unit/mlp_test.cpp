#include <gtest/gtest.h>

#include <cmath>

#include "ebipla/mlp.hpp"
#include "ebipla/noise.hpp"

namespace ebipla {
namespace {

Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Vector v(static_cast<Eigen::Index>(n));
  NoiseStream(seed).normal({.role = NoiseRole::kTest}, {v.data(), n});
  return v * scale;
}

TEST(Mlp, ParamCountOfDefaultArchitecture) {
  const MlpSpec spec{{2, 128, 128, 128, 1}, Activation::kSiLU};
  EXPECT_EQ(spec.param_count(), 33537u);
}

TEST(Mlp, SpecValidation) {
  EXPECT_THROW((MlpSpec{{2, 1}, Activation::kSiLU}.validate()), ConfigError);
  EXPECT_THROW((MlpSpec{{2, 4, 2}, Activation::kSiLU}.validate()), ConfigError);
  EXPECT_THROW((MlpSpec{{2, 0, 1}, Activation::kSiLU}.validate()), ConfigError);
  EXPECT_THROW(activation_from_string("tanh"), ConfigError);
}

TEST(Mlp, FlattenRoundTrip) {
  const MlpSpec spec{{3, 5, 4, 1}, Activation::kReLU};
  const Vector p = random_vector(spec.param_count(), 1);
  EXPECT_EQ(flatten(spec, unflatten(spec, p)), p);
}

TEST(Mlp, ZeroNetworkGivesZeroEnergyAndGradients) {
  for (Activation act : {Activation::kSiLU, Activation::kReLU}) {
    const MlpSpec spec{{2, 6, 1}, act};
    const Vector p = Vector::Zero(static_cast<Eigen::Index>(spec.param_count()));
    const Matrix x = Matrix::Random(2, 5);
    const MlpTape tape = mlp_energy_forward(spec, p, x);
    EXPECT_EQ(tape.energy.norm(), 0.0);
    EXPECT_EQ(mlp_backward_x(spec, p, tape).norm(), 0.0);
    const Vector up = Vector::LinSpaced(5, 1.0, 5.0);
    const Vector g = mlp_backward_params(spec, p, tape, up);
    // The output bias gradient is the sum of the upstream weights.
    EXPECT_DOUBLE_EQ(g(g.size() - 1), up.sum());
  }
}

TEST(Mlp, ReluTwoTwoOneHandEvaluation) {
  const MlpSpec spec{{2, 2, 1}, Activation::kReLU};
  std::vector<MlpLayer> layers(2);
  layers[0].weight = Matrix::Identity(2, 2);
  layers[0].bias = Vector::Zero(2);
  layers[1].weight = Matrix(1, 2);
  layers[1].weight << 2.0, 3.0;
  layers[1].bias = Vector::Constant(1, 0.5);
  const Vector p = flatten(spec, layers);
  Matrix x(2, 1);
  x << 1.5, 2.0;
  const MlpTape tape = mlp_energy_forward(spec, p, x);
  EXPECT_DOUBLE_EQ(tape.energy(0), 2.0 * 1.5 + 3.0 * 2.0 + 0.5);
  const Matrix gx = mlp_backward_x(spec, p, tape);
  EXPECT_DOUBLE_EQ(gx(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(gx(1, 0), 3.0);
}

TEST(Mlp, LinearRegionGradientIsWeightProduct) {
  const MlpSpec spec{{2, 2, 1}, Activation::kReLU};
  std::vector<MlpLayer> layers(2);
  layers[0].weight = Matrix(2, 2);
  layers[0].weight << 1.0, 2.0, 0.5, -1.0;
  layers[0].bias = Vector::Constant(2, 10.0);  // keeps both units active near the input
  layers[1].weight = Matrix(1, 2);
  layers[1].weight << -1.0, 4.0;
  layers[1].bias = Vector::Zero(1);
  const Vector p = flatten(spec, layers);
  Matrix x(2, 1);
  x << 0.3, -0.2;
  const MlpTape tape = mlp_energy_forward(spec, p, x);
  const Matrix expected = (layers[1].weight * layers[0].weight).transpose();
  EXPECT_NEAR((mlp_backward_x(spec, p, tape) - expected).norm(), 0.0, 1e-15);
}

TEST(Mlp, SiluOfZeroIsZero) {
  const MlpSpec spec{{2, 4, 1}, Activation::kSiLU};
  Vector p = random_vector(spec.param_count(), 2);
  auto layers = unflatten(spec, p);
  for (auto& l : layers) l.bias.setZero();
  p = flatten(spec, layers);
  EXPECT_EQ(mlp_energy_forward(spec, p, Matrix::Zero(2, 1)).energy(0), 0.0);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  for (Activation act : {Activation::kSiLU, Activation::kReLU}) {
    const MlpSpec spec{{2, 8, 1}, act};
    MlpEnergy energy(spec);
    const Vector p = init_mlp_params(spec, NoiseStream(3)) + random_vector(spec.param_count(), 4, 0.1);
    const Vector x = random_vector(2, 5);
    const auto fx = [&](const Vector& v) { return energy.u(p, v); };
    const auto gx = [&](const Vector& v) { return energy.grad_x_u(p, v); };
    EXPECT_LT(finite_diff_check(fx, gx, x, 1e-5), 1e-5);
    const auto fp = [&](const Vector& q) { return energy.u(q, x); };
    const auto gp = [&](const Vector& q) { return energy.grad_alpha_u(q, x); };
    EXPECT_LT(finite_diff_check(fp, gp, p, 1e-5), 1e-5);
  }
}

TEST(Mlp, EvaluateAgreesWithSeparateCalls) {
  const MlpSpec spec{{2, 16, 16, 1}, Activation::kSiLU};
  MlpEnergy energy(spec);
  const Vector p = init_mlp_params(spec, NoiseStream(9));
  const Matrix x = Matrix::Random(2, 300);
  const EnergyBatchEval eval = energy.evaluate(p, x, 0.25);
  EXPECT_NEAR((eval.energy - energy.energy(p, x)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((eval.grad_x - energy.grad_x(p, x)).norm(), 0.0, 1e-12);
  const Vector w = Vector::Constant(300, 0.25);
  EXPECT_NEAR((eval.grad_alpha - energy.weighted_grad_alpha(p, x, w)).norm(), 0.0, 1e-10);
}

TEST(Mlp, InitIsXavierUniform) {
  const MlpSpec spec{{2, 128, 1}, Activation::kSiLU};
  const auto layers = unflatten(spec, init_mlp_params(spec, NoiseStream(1)));
  const double limit0 = std::sqrt(6.0 / 130.0);
  EXPECT_LE(layers[0].weight.cwiseAbs().maxCoeff(), limit0);
  EXPECT_GT(layers[0].weight.cwiseAbs().maxCoeff(), 0.9 * limit0);
  EXPECT_EQ(layers[0].bias.norm(), 0.0);
}

TEST(Mlp, StaleTapeAndBadInputAreRejected) {
  const MlpSpec spec{{2, 4, 1}, Activation::kSiLU};
  const Vector p = init_mlp_params(spec, NoiseStream(1));
  const MlpTape tape = mlp_energy_forward(spec, p, Matrix::Ones(2, 3));
  Vector q = p;
  q(0) += 1.0;
  EXPECT_THROW(mlp_backward_x(spec, q, tape), ConfigError);
  Matrix bad = Matrix::Ones(2, 3);
  bad(1, 2) = NAN;
  EXPECT_THROW(mlp_energy_forward(spec, p, bad), NumericalError);
  EXPECT_THROW(mlp_energy_forward(spec, p, Matrix::Ones(3, 1)), DimensionError);
}

}  // namespace
}  // namespace ebipla
