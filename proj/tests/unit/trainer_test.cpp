#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ebipla/dynamics.hpp"
#include "ebipla/mlp.hpp"
#include "ebipla/parallel.hpp"
#include "ebipla/testbeds.hpp"
#include "ebipla/trainer.hpp"

namespace ebipla {
namespace {

Dataset gaussian_data(std::size_t M, std::size_t d, std::uint64_t seed) {
  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(M));
  NoiseStream(seed).normal({.role = NoiseRole::kData},
                           {data.y.data(), static_cast<std::size_t>(data.y.size())});
  data.y.array() += 1.0;
  return data;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

TEST(Trainer, ZeroIterationsLeaveStateAndMetricsEmpty) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(10, 1, 1);
  RunConfig config;
  config.algorithm = Algorithm::kFullExact;
  config.K = 0;
  config.h = 0.1;
  const Theta theta0{scalar(0.3), Vector()};
  const TrainResult r = train(config, model, decoder, data, theta0);
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_EQ(r.state.theta.alpha, theta0.alpha);
  EXPECT_EQ(metrics_csv(r.metrics), "iteration,epoch,energy_loss,generator_loss,param_error,mmd\n");
}

TEST(Trainer, FullExactConvergesToDataMean) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(100, 1, 2);
  RunConfig config;
  config.algorithm = Algorithm::kFullExact;
  config.N = 16;
  config.K = 2000;
  config.h = 0.1;
  config.seed = 3;
  const TrainResult r = train(config, model, decoder, data, Theta{scalar(0.0), Vector()});
  // Stationary spread sqrt(d_theta / (mu M N)) with mu ~ 0.38 is about 0.026.
  EXPECT_NEAR(r.state.theta.alpha(0), data.y.mean(), 0.1);
}

TEST(Trainer, ZeroNoiseDescendsOnQuadratic) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(50, 1, 4);
  RunConfig config;
  config.algorithm = Algorithm::kFullExact;
  config.N = 2;
  config.K = 40;
  config.h = 0.1;
  config.zero_noise = true;
  config.metric_cadence = 1;
  const TrainResult r = train(config, model, decoder, data, Theta{scalar(-3.0), Vector()});
  ASSERT_EQ(r.metrics.size(), 40u);
  // Joint objective phi = U + V with Z_alpha constant; its particle average must not increase.
  for (std::size_t i = 1; i < r.metrics.size(); ++i) {
    const double prev = r.metrics[i - 1].energy_loss + r.metrics[i - 1].generator_loss;
    const double cur = r.metrics[i].energy_loss + r.metrics[i].generator_loss;
    EXPECT_LE(cur, prev + 1e-12);
  }
}

TEST(Trainer, SingleBatchPracticalMatchesFullInexact) {
  GaussianLocationModel model(2);
  LinearDecoder decoder(2, 3, 0.8, true);
  const Dataset data = gaussian_data(12, 3, 5);
  const Theta theta0 = default_initial_theta(model, decoder, 9);

  RunConfig full;
  full.algorithm = Algorithm::kFullInexact;
  full.N = 3;
  full.K = 4;
  full.J = 5;
  full.h = 0.05;
  full.gamma = 0.05;
  full.zero_noise = true;
  full.seed = 7;

  RunConfig practical = full;
  practical.algorithm = Algorithm::kPractical;
  practical.batch_size = 12;
  practical.optimizer = OptimizerKind::kSgd;
  practical.energy_optimizer.lr = full.h;
  practical.generator_optimizer.lr = full.h;

  const TrainResult a = train(full, model, decoder, data, theta0);
  const TrainResult b = train(practical, model, decoder, data, theta0);
  EXPECT_EQ(a.state.theta.alpha, b.state.theta.alpha);
  EXPECT_EQ(a.state.theta.beta, b.state.theta.beta);
  EXPECT_EQ(a.state.cloud.data(), b.state.cloud.data());
}

TEST(Trainer, MetricCadenceZeroKeepsOnlyFinalRecord) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(20, 1, 6);
  RunConfig config;
  config.algorithm = Algorithm::kPractical;
  config.N = 2;
  config.K = 5;
  config.J = 3;
  config.h = 0.1;
  config.gamma = 0.1;
  config.batch_size = 7;
  const TrainResult r = train(config, model, decoder, data, Theta{scalar(0.0), Vector()});
  ASSERT_EQ(r.metrics.size(), 1u);
  EXPECT_EQ(r.metrics[0].epoch, 5u);
  EXPECT_EQ(r.metrics[0].iteration, 15u);  // three batches per epoch
  EXPECT_TRUE(std::isnan(r.metrics[0].param_error));
}

TEST(SubsampledLosses, EnergyCancelsWhenPriorEqualsPosterior) {
  GaussianScaleModel model(2);
  IdentityDecoder decoder(2, 1.0);
  ParticleCloud cloud(3, 1, 2);
  cloud.data() = Matrix::Random(2, 3);
  Dataset data;
  data.y = cloud.data();  // perfect reconstruction too
  const std::vector<std::uint32_t> batch{0, 2};
  Matrix prior(2, 2);
  prior.col(0) = cloud.particle(0, 0);
  prior.col(1) = cloud.particle(2, 0);
  const Theta theta{GaussianScaleModel::alpha_for_scale(2.0), Vector()};
  const SubsampledLosses l = subsampled_losses(model, decoder, theta, cloud, data, batch, prior);
  EXPECT_NEAR(l.energy_loss, 0.0, 1e-15);
  EXPECT_NEAR(l.grad_alpha.norm(), 0.0, 1e-15);
  EXPECT_EQ(l.generator_loss, 0.0);
}

TEST(SubsampledLosses, TwoPointBatchMatchesDirectSum) {
  // U(x) = a x^2 / 2 with a = e^alpha; V(x, y) = (y - w x)^2 / (2 sigma^2).
  GaussianScaleModel model(1);
  LinearDecoder decoder(1, 1, 0.5, false);
  ParticleCloud cloud(3, 2, 1);
  cloud.data() << 0.1, -0.4, 0.7, 1.2, -1.5, 0.3;
  Dataset data;
  data.y.resize(1, 3);
  data.y << 0.5, -1.0, 2.0;
  const std::vector<std::uint32_t> batch{1, 2};
  Matrix prior(1, 2);
  prior << 0.9, -0.2;
  const double a = 1.7, w = 0.6, s2 = 0.25;
  const Theta theta{GaussianScaleModel::alpha_for_scale(a), scalar(w)};
  const SubsampledLosses l = subsampled_losses(model, decoder, theta, cloud, data, batch, prior);

  double e_post = 0, e_prior = 0, v = 0, ga = 0, gb = 0;
  for (std::uint32_t m : batch) {
    for (std::size_t n = 0; n < 2; ++n) {
      const double x = cloud.particle(m, n)(0);
      const double y = data.y(0, m);
      e_post += a * x * x / 2 / 4;
      ga += a * x * x / 2 / 4;  // dU/dalpha = a x^2 / 2
      v += (y - w * x) * (y - w * x) / (2 * s2) / 4;
      gb += -(y - w * x) * x / s2 / 4;
    }
  }
  for (int c = 0; c < 2; ++c) {
    e_prior += a * prior(0, c) * prior(0, c) / 2 / 2;
    ga -= a * prior(0, c) * prior(0, c) / 2 / 2;
  }
  EXPECT_NEAR(l.energy_loss, e_post - e_prior, 1e-14);
  EXPECT_NEAR(l.generator_loss, v, 1e-14);
  EXPECT_NEAR(l.grad_alpha(0), ga, 1e-14);
  EXPECT_NEAR(l.grad_beta(0), gb, 1e-14);
}

TEST(NoiseAddition, AccumulatedVarianceIsTwoH) {
  const std::size_t M = 100000, N = 1, d = 1;
  const double h = 0.3, L = 4.0;
  ParticleCloud cloud(M, N, d);
  cloud.data().setZero();
  NoiseStream noise(12);
  for (std::uint32_t it = 0; it < 4; ++it) epoch_noise_addition(cloud, h, L, noise, it);
  const double var = cloud.data().squaredNorm() / static_cast<double>(M);
  EXPECT_NEAR(var / (2.0 * h), 1.0, 0.02);
}

TEST(NoiseAddition, ZeroStepIsNoOp) {
  ParticleCloud cloud(5, 2, 3);
  cloud.data() = Matrix::Random(3, 10);
  const Matrix before = cloud.data();
  epoch_noise_addition(cloud, 0.0, 2.0, NoiseStream(1), 0);
  EXPECT_EQ(cloud.data(), before);
  EXPECT_THROW(epoch_noise_addition(cloud, 0.1, 0.5, NoiseStream(1), 0), ConfigError);
}

TEST(EpochBatches, PartitionAndSorted) {
  const auto batches = epoch_batches(103, 25, NoiseStream(4), 2);
  ASSERT_EQ(batches.size(), 5u);
  EXPECT_EQ(batches.back().size(), 3u);
  std::set<std::uint32_t> seen;
  for (const auto& b : batches) {
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen.size(), 103u);
  EXPECT_NE(epoch_batches(103, 25, NoiseStream(4), 3)[0], batches[0]);
}

TEST(Warmup, ZeroWarmupIterationsMatchesPractical) {
  GaussianLocationModel model(1);
  LinearDecoder decoder(1, 2, 0.5, true);
  const Dataset data = gaussian_data(20, 2, 8);
  const Theta theta0 = default_initial_theta(model, decoder, 1);
  RunConfig config;
  config.algorithm = Algorithm::kPractical;
  config.N = 4;
  config.K = 3;
  config.J = 4;
  config.h = 0.05;
  config.gamma = 0.05;
  config.batch_size = 10;
  config.seed = 2;
  RunConfig warm = config;
  warm.algorithm = Algorithm::kPracticalWarmup;
  warm.warmup.iterations = 0;
  warm.warmup.initial_particles = 2;
  const TrainResult a = train(config, model, decoder, data, theta0);
  const TrainResult b = train(warm, model, decoder, data, theta0);
  EXPECT_EQ(a.state.theta.flat(), b.state.theta.flat());
  EXPECT_EQ(metrics_csv(a.metrics), metrics_csv(b.metrics));
}

TEST(Warmup, ReplicationCopiesParticlesBitwise) {
  GaussianLocationModel model(2);
  IdentityDecoder decoder(2, 1.0);
  const Dataset data = gaussian_data(6, 2, 9);
  RunConfig config;
  config.algorithm = Algorithm::kPracticalWarmup;
  config.N = 6;
  config.K = 2;
  config.J = 2;
  config.gamma = 0.05;
  config.h = 0.05;
  config.batch_size = 3;
  config.warmup.iterations = 2;
  config.warmup.initial_particles = 2;
  config.warmup.corrector_steps = 3;
  ParticleCloud at_switch;
  RunHooks hooks;
  hooks.observer = [&](std::size_t it, const TrainState& s) {
    if (it == 2) at_switch = s.cloud;
  };
  const TrainResult r = train(config, model, decoder, data, Theta{Vector::Zero(2), Vector()}, hooks);
  EXPECT_EQ(r.state.cloud.N(), 6u);
  ASSERT_EQ(at_switch.N(), 2u);

  ParticleCloud copy = at_switch;
  copy.replicate(3);
  ASSERT_EQ(copy.N(), 6u);
  for (std::size_t m = 0; m < 6; ++m) {
    for (std::size_t n = 0; n < 2; ++n) {
      for (std::size_t r2 = 0; r2 < 3; ++r2) {
        EXPECT_EQ(copy.particle(m, n * 3 + r2), at_switch.particle(m, n));
      }
    }
  }
}

TEST(Warmup, CorrectorContractsTowardsMode) {
  // Zero noise: each corrector step maps x - x* to (1 - c h)(x - x*) with c = 2.
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const double h = 0.05;
  Matrix y = Matrix::Constant(1, 1, 2.0);
  const std::vector<std::uint32_t> ids{0};
  const Matrix x = posterior_langevin(model, decoder, Theta{scalar(0.0), Vector()},
                                      Matrix::Constant(1, 1, 5.0), y, ids, ids, h, 10,
                                      NoiseStream::zeros(), 0, NoiseRole::kWarmup);
  EXPECT_NEAR(x(0, 0) - 1.0, std::pow(1.0 - 2.0 * h, 10) * 4.0, 1e-12);
}

TEST(Lebm, ZeroPosteriorStepsUseRawNormals) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(8, 1, 10);
  RunConfig config;
  config.algorithm = Algorithm::kLebmBaseline;
  config.K = 1;
  config.J = 2;
  config.gamma = 0.05;
  config.batch_size = 8;
  config.lebm.posterior_steps = 0;
  config.seed = 5;
  const TrainResult r = train(config, model, decoder, data, Theta{scalar(0.0), Vector()});
  const auto ids = iota_ids(8);
  const Matrix raw = standard_normal_states(1, ids, NoiseStream(5), 0, NoiseRole::kLebmInit);
  EXPECT_EQ(r.state.cloud.data(), raw);
  EXPECT_TRUE(std::isfinite(r.metrics.back().energy_loss));
  EXPECT_EQ(r.budget.posterior, 0u);
}

TEST(Budget, BaselineSpendsStepsPerChain) {
  GaussianLocationModel model(1);
  IdentityDecoder decoder(1, 1.0);
  const Dataset data = gaussian_data(40, 1, 11);
  RunConfig base;
  base.K = 2;
  base.J = 2;
  base.gamma = 0.05;
  base.h = 0.05;
  base.batch_size = 20;
  RunConfig particles = base;
  particles.algorithm = Algorithm::kPractical;
  particles.N = 8;
  RunConfig lebm = base;
  lebm.algorithm = Algorithm::kLebmBaseline;
  lebm.lebm.posterior_steps = 8;
  const Theta theta0{scalar(0.0), Vector()};
  const GradientBudget a = train(particles, model, decoder, data, theta0).budget;
  const GradientBudget b = train(lebm, model, decoder, data, theta0).budget;
  EXPECT_DOUBLE_EQ(a.posterior_per_epoch(), 40.0 * 8.0);
  EXPECT_DOUBLE_EQ(b.posterior_per_epoch(), 40.0 * 8.0);
  EXPECT_DOUBLE_EQ(a.posterior_per_chain_per_epoch(), 1.0);
  EXPECT_DOUBLE_EQ(b.posterior_per_chain_per_epoch(), 8.0);
}

TEST(Determinism, MetricsIdenticalAcrossThreadCounts) {
  MlpEnergy model({{2, 16, 16, 1}, Activation::kSiLU});
  LinearDecoder decoder(2, 2, 0.1, true);
  const Dataset data = gaussian_data(300, 2, 12);
  RunConfig config;
  config.algorithm = Algorithm::kPractical;
  config.N = 4;
  config.K = 3;
  config.J = 5;
  config.h = 0.5;
  config.gamma = 0.01;
  config.posterior_step_scale = 0.01;
  config.batch_size = 100;
  config.metric_cadence = 1;
  config.seed = 99;
  const Theta theta0 = default_initial_theta(model, decoder, 99);
  set_worker_threads(1);
  const std::string one = metrics_csv(train(config, model, decoder, data, theta0).metrics);
  set_worker_threads(8);
  const std::string eight = metrics_csv(train(config, model, decoder, data, theta0).metrics);
  set_worker_threads(1);
  EXPECT_EQ(one, eight);
  EXPECT_EQ(one, metrics_csv(train(config, model, decoder, data, theta0).metrics));
}

TEST(RunConfig, RejectsInvalidSettings) {
  RunConfig c;
  c.batch_size = 50;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.batch_size = 5;
  c.N = 0;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.N = 4;
  c.algorithm = Algorithm::kFullExact;
  c.posterior_step_scale = 0.5;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.posterior_step_scale = 1.0;
  c.mu = 1.0;
  c.smoothness = 3.0;
  c.h = 0.6;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.h = 0.5;
  EXPECT_NO_THROW(c.validate(10));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_EQ(format_double(-2.5e-10), "-2.5e-10");
}

}  // namespace
}  // namespace ebipla
