#include <benchmark/benchmark.h>

#include "ebipla/dynamics.hpp"
#include "ebipla/eval.hpp"
#include "ebipla/mlp.hpp"
#include "ebipla/noise.hpp"
#include "ebipla/parallel.hpp"
#include "ebipla/swiss_roll.hpp"
#include "ebipla/testbeds.hpp"

namespace {

using namespace ebipla;

MlpSpec swiss_spec() { return {{2, 128, 128, 128, 1}, Activation::kSiLU}; }

Matrix normal_points(std::size_t count, std::uint32_t stream) {
  const NoiseStream noise(7);
  Matrix x(2, static_cast<Eigen::Index>(count));
  noise.normal({.role = NoiseRole::kTest, .m = stream}, {x.data(), static_cast<std::size_t>(x.size())});
  return x;
}

void BM_MlpForward(benchmark::State& state) {
  const auto spec = swiss_spec();
  const Vector params = init_mlp_params(spec, NoiseStream(1));
  const Matrix x = normal_points(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_energy_forward(spec, params, x).energy);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(256)->Arg(4096);

void BM_MlpGradX(benchmark::State& state) {
  const MlpEnergy model(swiss_spec());
  const Vector params = init_mlp_params(model.spec(), NoiseStream(1));
  const Matrix x = normal_points(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(model.grad_x(params, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpGradX)->Arg(256)->Arg(4096);

void BM_MlpGradAlpha(benchmark::State& state) {
  const MlpEnergy model(swiss_spec());
  const Vector params = init_mlp_params(model.spec(), NoiseStream(1));
  const Matrix x = normal_points(static_cast<std::size_t>(state.range(0)), 0);
  const Vector w = Vector::Constant(x.cols(), 1.0 / static_cast<double>(x.cols()));
  for (auto _ : state) benchmark::DoNotOptimize(model.weighted_grad_alpha(params, x, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpGradAlpha)->Arg(256)->Arg(4096);

void BM_UlaPrior(benchmark::State& state) {
  const MlpEnergy model(swiss_spec());
  const Vector params = init_mlp_params(model.spec(), NoiseStream(1));
  const auto ids = iota_ids(static_cast<std::size_t>(state.range(0)));
  const NoiseStream noise(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ula_prior_sample(model, params, ids, 0.007, 10, noise));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}
BENCHMARK(BM_UlaPrior)->Arg(1000);

void BM_MmdUnbiased(benchmark::State& state) {
  const Matrix p = normal_points(static_cast<std::size_t>(state.range(0)), 1);
  const Matrix q = normal_points(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(mmd_unbiased(p, q));
}
BENCHMARK(BM_MmdUnbiased)->Arg(1000);

void BM_NoiseNormal(benchmark::State& state) {
  const NoiseStream noise(11);
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  std::uint32_t m = 0;
  for (auto _ : state) {
    noise.normal({.role = NoiseRole::kTest, .m = m++}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NoiseNormal)->Arg(2)->Arg(1024);

void BM_GaussianLocationPosteriorStep(benchmark::State& state) {
  const GaussianLocationModel model(1);
  const IdentityDecoder decoder(1, 1.0);
  Dataset data;
  data.y = Matrix::Zero(1, 100);
  ParticleCloud cloud(100, static_cast<std::size_t>(state.range(0)), 1);
  const Theta theta{Vector::Zero(1), Vector()};
  const NoiseStream noise(5);
  std::uint32_t k = 0;
  for (auto _ : state) posterior_particle_step(model, decoder, theta, cloud, data, 0.1, noise, k++);
  state.SetItemsProcessed(state.iterations() * 100 * state.range(0));
}
BENCHMARK(BM_GaussianLocationPosteriorStep)->Arg(64);

}  // namespace
int main(int argc, char** argv) {
  ebipla::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
