#include "ebipla/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "detail.hpp"
#include "ebipla/dynamics.hpp"
#include "ebipla/errors.hpp"
#include "ebipla/eval.hpp"
#include "ebipla/mlp.hpp"
#include "ebipla/testbeds.hpp"

namespace ebipla {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFullExact: return "full_exact";
    case Algorithm::kFullInexact: return "full_inexact";
    case Algorithm::kPractical: return "practical";
    case Algorithm::kPracticalWarmup: return "practical_warmup";
    case Algorithm::kLebmBaseline: return "lebm";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::kFullExact, Algorithm::kFullInexact, Algorithm::kPractical,
                 Algorithm::kPracticalWarmup, Algorithm::kLebmBaseline}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected full_exact, full_inexact, practical, practical_warmup or lebm)");
}

bool is_minibatch(Algorithm algorithm) {
  return algorithm == Algorithm::kPractical || algorithm == Algorithm::kPracticalWarmup ||
         algorithm == Algorithm::kLebmBaseline;
}

void RunConfig::validate(std::size_t M) const {
  if (M == 0) throw ConfigError("dataset is empty");
  if (N == 0) throw ConfigError("N must be at least 1");
  const bool uses_prior_chains = algorithm != Algorithm::kFullExact;
  if (uses_prior_chains && J == 0) throw ConfigError("J must be at least 1");
  if (uses_prior_chains && !(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (algorithm != Algorithm::kLebmBaseline && !(h > 0.0)) throw ConfigError("h must be positive");
  if (!(posterior_step_scale > 0.0)) {
    throw ConfigError("posterior_step_scale must be positive");
  }
  if (!is_minibatch(algorithm) && posterior_step_scale != 1.0) {
    throw ConfigError("posterior_step_scale applies to the minibatch algorithms only");
  }
  if (!(init_particle_std >= 0.0)) throw ConfigError("init_particle_std must be non-negative");
  if (is_minibatch(algorithm) && (batch_size == 0 || batch_size > M)) {
    std::ostringstream msg;
    msg << "batch size " << batch_size << " must lie in [1, M = " << M << "]";
    throw ConfigError(msg.str());
  }
  if (algorithm == Algorithm::kPracticalWarmup) {
    if (warmup.initial_particles == 0 || N % warmup.initial_particles != 0) {
      throw ConfigError("warmup: initial particle count must divide N");
    }
    if (!(warmup.h > 0.0)) throw ConfigError("warmup: h must be positive");
    if (warmup.corrector_steps == 0) throw ConfigError("warmup: corrector steps must be >= 1");
  }
  if (algorithm == Algorithm::kLebmBaseline) {
    if (!(lebm.step_size > 0.0)) throw ConfigError("lebm: posterior step size must be positive");
  }
  if (mu.has_value() != smoothness.has_value()) {
    throw ConfigError("mu and L must be given together");
  }
  if (mu && !is_minibatch(algorithm)) {
    if (!(*mu > 0.0) || !(*smoothness >= *mu)) throw ConfigError("need 0 < mu <= L");
    const double h_max = 2.0 / (*mu + *smoothness);
    if (h > h_max) {
      std::ostringstream msg;
      msg << "step size h = " << h << " violates h <= 2 / (mu + L) = " << h_max;
      throw ConfigError(msg.str());
    }
  }
  if (eval.enabled) {
    if (eval.mmd_samples < 2) throw ConfigError("eval: at least 2 MMD samples are needed");
    if (eval.prior_steps == 0) throw ConfigError("eval: prior steps must be >= 1");
    if (!(eval.bandwidth > 0.0)) throw ConfigError("eval: bandwidth must be positive");
  }
  const std::size_t per_epoch = is_minibatch(algorithm) ? (M + batch_size - 1) / batch_size : 1;
  if (K > 0 && per_epoch > std::numeric_limits<std::uint32_t>::max() / K) {
    throw ConfigError("too many iterations for the noise key space");
  }
}

double GradientBudget::posterior_per_epoch() const {
  return epochs == 0 ? 0.0 : static_cast<double>(posterior) / static_cast<double>(epochs);
}

double GradientBudget::posterior_per_chain_per_epoch() const {
  if (posterior_chains == 0) return 0.0;
  return posterior_per_epoch() / static_cast<double>(posterior_chains);
}

Theta default_initial_theta(const EnergyModel& model, const Decoder& decoder,
                            std::uint64_t seed) {
  const NoiseStream noise(seed);
  Theta theta;
  if (const auto* mlp = dynamic_cast<const MlpEnergy*>(&model)) {
    theta.alpha = init_mlp_params(mlp->spec(), noise, 0);
  } else {
    theta.alpha = Vector::Zero(static_cast<Eigen::Index>(model.param_dim()));
  }
  if (const auto* linear = dynamic_cast<const LinearDecoder*>(&decoder)) {
    const auto dx = static_cast<Eigen::Index>(linear->latent_dim());
    const auto dy = static_cast<Eigen::Index>(linear->data_dim());
    Matrix w(dy, dx);
    noise.uniform({.role = NoiseRole::kParamInit, .m = 1},
                  {w.data(), static_cast<std::size_t>(w.size())});
    const double limit = std::sqrt(6.0 / static_cast<double>(dx + dy));
    w = (2.0 * w.array() - 1.0) * limit;
    theta.beta = linear->pack(w, Vector::Zero(dy));
  } else {
    theta.beta = Vector::Zero(static_cast<Eigen::Index>(decoder.param_dim()));
  }
  return theta;
}

namespace {

std::size_t initial_particles(const RunConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kPracticalWarmup:
      return config.warmup.iterations > 0 ? config.warmup.initial_particles : config.N;
    case Algorithm::kLebmBaseline: return 1;
    default: return config.N;
  }
}

}  // namespace

TrainState initial_state(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                         const Dataset& data, const Theta& theta0) {
  check_compatible(model, decoder, theta0);
  require_dim("data dim", decoder.data_dim(), data.dim());
  const NoiseStream noise(config.seed, config.zero_noise);
  const std::size_t N = initial_particles(config);
  TrainState state;
  state.theta = theta0;
  state.cloud = ParticleCloud(data.size(), N, model.latent_dim());
  const std::size_t d = model.latent_dim();
  for (std::size_t m = 0; m < data.size(); ++m) {
    for (std::size_t n = 0; n < N; ++n) {
      auto col = state.cloud.particle(m, n);
      noise.normal({.role = NoiseRole::kParticleInit, .m = static_cast<std::uint32_t>(m),
                    .n = static_cast<std::uint32_t>(n)},
                   {col.data(), d});
      col *= config.init_particle_std;
    }
  }
  state.energy_optimizer =
      Optimizer(config.optimizer, config.energy_optimizer, model.param_dim());
  state.generator_optimizer =
      Optimizer(config.optimizer, config.generator_optimizer, decoder.param_dim());
  state.batches_per_epoch =
      is_minibatch(config.algorithm)
          ? static_cast<double>(data.size()) / static_cast<double>(config.batch_size)
          : 1.0;
  return state;
}

namespace {

/// Batch particles and their targets, one column per (m, n) in batch order.
void gather(const ParticleCloud& cloud, const Dataset& data, std::span<const std::uint32_t> batch,
            Matrix& x, Matrix& y) {
  const std::size_t N = cloud.N();
  const auto width = static_cast<Eigen::Index>(batch.size() * N);
  x.resize(static_cast<Eigen::Index>(cloud.latent_dim()), width);
  y.resize(static_cast<Eigen::Index>(data.dim()), width);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto off = static_cast<Eigen::Index>(r * N);
    x.middleCols(off, static_cast<Eigen::Index>(N)) = cloud.row(batch[r]);
    y.middleCols(off, static_cast<Eigen::Index>(N)).colwise() = data.y.col(batch[r]);
  }
}

double mean_energy(const EnergyModel& model, const Vector& alpha, const Matrix& x) {
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), detail::kColumnBlock};
  std::vector<double> partial(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    partial[c] = model.energy(alpha, x.middleCols(b, e - b)).sum();
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0) / static_cast<double>(x.cols());
}

double mean_v(const Decoder& decoder, const Vector& beta, const Matrix& x, const Matrix& y) {
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), detail::kColumnBlock};
  std::vector<double> partial(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    partial[c] = decoder.v(beta, Matrix(x.middleCols(b, e - b)), Matrix(y.middleCols(b, e - b))).sum();
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0) / static_cast<double>(x.cols());
}

Vector uniform_weights(Eigen::Index count) {
  return Vector::Constant(count, 1.0 / static_cast<double>(count));
}

}  // namespace

SubsampledLosses subsampled_losses(const EnergyModel& model, const Decoder& decoder,
                                   const Theta& theta, const ParticleCloud& cloud,
                                   const Dataset& data, std::span<const std::uint32_t> batch,
                                   const Matrix& prior_samples) {
  check_compatible(model, decoder, theta);
  require_dim("M (data vs particles)", data.size(), cloud.M());
  require_dim("prior samples", batch.size(), prior_samples.cols());
  require_dim("prior sample latent", model.latent_dim(), prior_samples.rows());
  if (batch.empty()) throw ConfigError("subsampled losses: empty batch");
  for (std::uint32_t m : batch) {
    if (m >= cloud.M()) throw DimensionError("batch index", cloud.M(), m);
  }
  Matrix x;
  Matrix y;
  gather(cloud, data, batch, x, y);

  SubsampledLosses out;
  out.energy_loss = mean_energy(model, theta.alpha, x) - mean_energy(model, theta.alpha, prior_samples);
  out.generator_loss = mean_v(decoder, theta.beta, x, y);
  out.grad_alpha =
      detail::blocked_grad_alpha(model, theta.alpha, x, uniform_weights(x.cols())) -
      detail::blocked_grad_alpha(model, theta.alpha, prior_samples,
                                 uniform_weights(prior_samples.cols()));
  if (decoder.param_dim() > 0) {
    out.grad_beta =
        detail::blocked_grad_beta(decoder, theta.beta, x, y, uniform_weights(x.cols()));
  } else {
    out.grad_beta = Vector();
  }
  if (!std::isfinite(out.energy_loss) || !std::isfinite(out.generator_loss) ||
      !out.grad_alpha.allFinite() || !out.grad_beta.allFinite()) {
    throw NumericalError("subsampled losses are not finite");
  }
  return out;
}

void epoch_noise_addition(ParticleCloud& cloud, double h, double L, const NoiseStream& noise,
                          std::uint32_t iteration) {
  if (!(h >= 0.0)) throw ConfigError("noise addition: h must be non-negative");
  if (!(L >= 1.0)) throw ConfigError("noise addition: L = M / B must be at least 1");
  if (h == 0.0) return;
  const double scale = std::sqrt(2.0 * h / L);
  const std::size_t d = cloud.latent_dim();
  const std::size_t N = cloud.N();
  const std::size_t rows_per_chunk = std::max<std::size_t>(1, detail::kColumnBlock / N);
  const ChunkPlan plan{cloud.M(), rows_per_chunk};
  parallel_for(plan.chunks(), [&](std::size_t chunk) {
    Vector w(static_cast<Eigen::Index>(d));
    for (std::size_t m = plan.begin(chunk); m < plan.end(chunk); ++m) {
      for (std::size_t n = 0; n < N; ++n) {
        noise.normal({.k = iteration, .role = NoiseRole::kNoiseAddition,
                      .m = static_cast<std::uint32_t>(m), .n = static_cast<std::uint32_t>(n)},
                     {w.data(), d});
        cloud.particle(m, n) += scale * w;
      }
    }
  });
}

std::vector<std::vector<std::uint32_t>> epoch_batches(std::size_t M, std::size_t B,
                                                      const NoiseStream& noise,
                                                      std::uint32_t epoch) {
  if (B == 0 || B > M) throw ConfigError("batch size must lie in [1, M]");
  std::vector<std::uint32_t> perm = iota_ids(M);
  // Fisher-Yates with counter-based uniforms.
  const NoiseKey key{.k = epoch, .role = NoiseRole::kShuffle};
  for (std::size_t i = M; i > 1; --i) {
    const auto j = static_cast<std::size_t>(noise.uniform_index(key, M - i, i));
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<std::vector<std::uint32_t>> batches;
  for (std::size_t b = 0; b < M; b += B) {
    const auto e = std::min(M, b + B);
    std::vector<std::uint32_t> batch(perm.begin() + static_cast<std::ptrdiff_t>(b),
                                     perm.begin() + static_cast<std::ptrdiff_t>(e));
    std::sort(batch.begin(), batch.end());
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
           const RunHooks& hooks)
      : config_(config), model_(model), decoder_(decoder), hooks_(hooks),
        eval_noise_(split_seed(config.seed, 1), config.zero_noise), start_(Clock::now()) {}

  bool due(std::size_t count, std::size_t total) const {
    if (count == total) return true;
    return config_.metric_cadence > 0 && count % config_.metric_cadence == 0;
  }

  void record(const TrainState& state, double energy_loss, double generator_loss) {
    MetricsRecord r;
    r.iteration = state.iteration;
    r.epoch = state.epoch;
    r.energy_loss = energy_loss;
    r.generator_loss = generator_loss;
    r.param_error = hooks_.theta_star ? parameter_error(state.theta, *hooks_.theta_star)
                                      : std::numeric_limits<double>::quiet_NaN();
    r.mmd = std::numeric_limits<double>::quiet_NaN();
    if (config_.eval.enabled && hooks_.mmd_reference) {
      const double gamma = config_.eval.gamma > 0.0 ? config_.eval.gamma : config_.gamma;
      const Matrix samples =
          generate_samples(model_, decoder_, state.theta, config_.eval.mmd_samples,
                           config_.eval.prior_steps, gamma, eval_noise_,
                           static_cast<std::uint32_t>(records_.size()));
      r.mmd = mmd_unbiased(samples, *hooks_.mmd_reference, {.bandwidth = config_.eval.bandwidth});
    }
    r.wall_ms = elapsed_ms();
    records_.push_back(r);
  }

  void observe(const TrainState& state) const {
    if (hooks_.observer) hooks_.observer(state.iteration, state);
  }

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

  std::vector<MetricsRecord> take() { return std::move(records_); }

 private:
  const RunConfig& config_;
  const EnergyModel& model_;
  const Decoder& decoder_;
  const RunHooks& hooks_;
  NoiseStream eval_noise_;
  Clock::time_point start_;
  std::vector<MetricsRecord> records_;
};

void require_algorithm(const RunConfig& config, std::initializer_list<Algorithm> allowed,
                       const char* runner) {
  for (auto a : allowed) {
    if (config.algorithm == a) return;
  }
  throw ConfigError(std::string(runner) + " cannot run algorithm '" +
                    to_string(config.algorithm) + "'");
}

void apply_optimizers(TrainState& state, const SubsampledLosses& losses) {
  state.theta.alpha = state.energy_optimizer.step(state.theta.alpha, losses.grad_alpha);
  if (state.theta.beta.size() > 0) {
    state.theta.beta = state.generator_optimizer.step(state.theta.beta, losses.grad_beta);
  }
  if (!state.theta.all_finite()) {
    throw NumericalError("parameters became non-finite at iteration " +
                         std::to_string(state.iteration));
  }
}

/// Shared epoch loop of the minibatch algorithms. `batch_step` advances one batch and
/// returns its losses.
template <typename BatchStep>
TrainResult run_epochs(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                       const Dataset& data, const RunHooks& hooks, TrainState state,
                       GradientBudget budget, BatchStep&& batch_step) {
  const NoiseStream noise(config.seed, config.zero_noise);
  Recorder recorder(config, model, decoder, hooks);
  for (std::size_t e = 0; e < config.K; ++e) {
    const auto batches =
        epoch_batches(data.size(), config.batch_size, noise, static_cast<std::uint32_t>(e));
    double energy_sum = 0.0;
    double generator_sum = 0.0;
    for (const auto& batch : batches) {
      const SubsampledLosses losses = batch_step(state, batch, budget);
      energy_sum += losses.energy_loss;
      generator_sum += losses.generator_loss;
      ++state.iteration;
      recorder.observe(state);
    }
    ++state.epoch;
    ++budget.epochs;
    if (recorder.due(state.epoch, config.K)) {
      const auto count = static_cast<double>(batches.size());
      recorder.record(state, energy_sum / count, generator_sum / count);
    }
  }
  TrainResult result{std::move(state), recorder.take(), budget, recorder.elapsed_ms()};
  return result;
}

/// Sum of energies and weighted grad_alpha over fixed column blocks; grad_x per column when
/// `grad_x` is non-null.
struct BlockedEnergy {
  double energy_sum = 0.0;
  Vector grad_alpha;
};

BlockedEnergy blocked_evaluate(const EnergyModel& model, const Vector& alpha, const Matrix& x,
                               double weight, Matrix* grad_x) {
  const ChunkPlan plan{static_cast<std::size_t>(x.cols()), detail::kColumnBlock};
  std::vector<double> energy(plan.chunks());
  std::vector<Vector> grad(plan.chunks());
  if (grad_x) grad_x->resize(x.rows(), x.cols());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const auto b = static_cast<Eigen::Index>(plan.begin(c));
    const auto e = static_cast<Eigen::Index>(plan.end(c));
    EnergyBatchEval ev = model.evaluate(alpha, x.middleCols(b, e - b), weight);
    energy[c] = ev.energy.sum();
    grad[c] = std::move(ev.grad_alpha);
    if (grad_x) grad_x->middleCols(b, e - b) = ev.grad_x;
  });
  BlockedEnergy out;
  out.energy_sum = std::accumulate(energy.begin(), energy.end(), 0.0);
  out.grad_alpha = Vector::Zero(static_cast<Eigen::Index>(model.param_dim()));
  for (const auto& g : grad) out.grad_alpha += g;
  return out;
}

/// One batch of the particle algorithm: prior chains; losses and the noiseless posterior
/// step from a single evaluation at the current particles; noise addition on every
/// particle; optimizer steps.
SubsampledLosses practical_batch(const RunConfig& config, const EnergyModel& model,
                                 const Decoder& decoder, const Dataset& data,
                                 const NoiseStream& noise, TrainState& state,
                                 std::span<const std::uint32_t> batch, GradientBudget& budget) {
  const auto it = static_cast<std::uint32_t>(state.iteration);
  const Theta& theta = state.theta;
  const Matrix prior =
      ula_prior_sample(model, theta.alpha, batch, config.gamma, config.J, noise, {.iteration = it});

  Matrix x;
  Matrix y;
  gather(state.cloud, data, batch, x, y);
  const double w = 1.0 / static_cast<double>(x.cols());
  Matrix grad_x;
  const BlockedEnergy posterior = blocked_evaluate(model, theta.alpha, x, w, &grad_x);
  const BlockedEnergy prior_eval = blocked_evaluate(
      model, theta.alpha, prior, 1.0 / static_cast<double>(prior.cols()), nullptr);

  SubsampledLosses losses;
  losses.energy_loss = posterior.energy_sum / static_cast<double>(x.cols()) -
                       prior_eval.energy_sum / static_cast<double>(prior.cols());
  losses.generator_loss = mean_v(decoder, theta.beta, x, y);
  losses.grad_alpha = posterior.grad_alpha - prior_eval.grad_alpha;
  losses.grad_beta = decoder.param_dim() > 0
                         ? detail::blocked_grad_beta(decoder, theta.beta, x, y,
                                                     uniform_weights(x.cols()))
                         : Vector();
  if (!std::isfinite(losses.energy_loss) || !std::isfinite(losses.generator_loss) ||
      !losses.grad_alpha.allFinite() || !losses.grad_beta.allFinite()) {
    throw NumericalError("losses became non-finite at iteration " + std::to_string(it));
  }

  const double step = config.h * config.posterior_step_scale;
  x -= step * (grad_x + decoder.grad_x_v(theta.beta, x, y));
  const std::size_t N = state.cloud.N();
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto block = x.middleCols(static_cast<Eigen::Index>(r * N), static_cast<Eigen::Index>(N));
    if (!block.allFinite()) {
      std::ostringstream msg;
      msg << "posterior particles of data point " << batch[r]
          << " became non-finite at iteration " << it;
      throw NumericalError(msg.str());
    }
    state.cloud.row(batch[r]) = block;
  }
  epoch_noise_addition(state.cloud, step, state.batches_per_epoch, noise, it);
  apply_optimizers(state, losses);
  budget.posterior += batch.size() * N;
  budget.prior += batch.size() * config.J;
  return losses;
}

}  // namespace

TrainResult run_full(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                     const Dataset& data, const Theta& theta0, const RunHooks& hooks) {
  require_algorithm(config, {Algorithm::kFullExact, Algorithm::kFullInexact}, "run_full");
  config.validate(data.size());
  const bool exact = config.algorithm == Algorithm::kFullExact;
  if (exact && !model.prior_expectation(theta0.alpha)) {
    throw ConfigError("full_exact needs a closed-form prior expectation; model '" + model.name() +
                      "' has none (use full_inexact)");
  }
  const NoiseStream noise(config.seed, config.zero_noise);
  TrainState state = initial_state(config, model, decoder, data, theta0);
  GradientBudget budget;
  budget.posterior_chains = state.cloud.size();
  Recorder recorder(config, model, decoder, hooks);
  const auto all = iota_ids(data.size());

  for (std::size_t k = 0; k < config.K; ++k) {
    const auto it = static_cast<std::uint32_t>(k);
    Theta next;
    Matrix prior;
    if (exact) {
      next = theta_step_exact(model, decoder, state.theta, state.cloud, data, config.h, noise, it);
    } else {
      prior = ula_prior_sample(model, state.theta.alpha, all, config.gamma, config.J, noise,
                               {.iteration = it});
      next = theta_step_inexact(model, decoder, state.theta, state.cloud, data, config.h, prior,
                                noise, it);
      budget.prior += data.size() * config.J;
    }
    const bool record = recorder.due(k + 1, config.K);
    double energy_loss = 0.0;
    double generator_loss = 0.0;
    if (record) {
      Matrix x;
      Matrix y;
      gather(state.cloud, data, all, x, y);
      energy_loss = mean_energy(model, state.theta.alpha, x);
      if (!exact) energy_loss -= mean_energy(model, state.theta.alpha, prior);
      generator_loss = mean_v(decoder, state.theta.beta, x, y);
    }
    posterior_particle_step(model, decoder, state.theta, state.cloud, data, config.h, noise, it);
    budget.posterior += state.cloud.size();
    state.theta = std::move(next);
    ++state.iteration;
    ++state.epoch;
    ++budget.epochs;
    recorder.observe(state);
    if (record) recorder.record(state, energy_loss, generator_loss);
  }
  TrainResult result{std::move(state), recorder.take(), budget, recorder.elapsed_ms()};
  return result;
}

TrainResult run_practical(const RunConfig& config, const EnergyModel& model,
                          const Decoder& decoder, const Dataset& data, const Theta& theta0,
                          const RunHooks& hooks) {
  require_algorithm(config, {Algorithm::kPractical}, "run_practical");
  config.validate(data.size());
  const NoiseStream noise(config.seed, config.zero_noise);
  TrainState state = initial_state(config, model, decoder, data, theta0);
  GradientBudget budget;
  budget.posterior_chains = state.cloud.size();
  return run_epochs(config, model, decoder, data, hooks, std::move(state), budget,
                    [&](TrainState& s, std::span<const std::uint32_t> batch, GradientBudget& b) {
                      return practical_batch(config, model, decoder, data, noise, s, batch, b);
                    });
}

TrainResult run_warmup(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                       const Dataset& data, const Theta& theta0, const RunHooks& hooks) {
  require_algorithm(config, {Algorithm::kPracticalWarmup}, "run_warmup");
  config.validate(data.size());
  const NoiseStream noise(config.seed, config.zero_noise);
  TrainState state = initial_state(config, model, decoder, data, theta0);
  GradientBudget budget;
  budget.posterior_chains = data.size() * config.N;
  const std::size_t S = config.warmup.iterations;

  auto step = [&](TrainState& s, std::span<const std::uint32_t> batch, GradientBudget& b) {
    if (s.iteration == S && s.cloud.N() != config.N) {
      s.cloud.replicate(config.N / s.cloud.N());
    }
    if (s.iteration >= S) return practical_batch(config, model, decoder, data, noise, s, batch, b);

    const auto it = static_cast<std::uint32_t>(s.iteration);
    const Matrix prior =
        ula_prior_sample(model, s.theta.alpha, batch, config.gamma, config.J, noise, {.iteration = it});
    const SubsampledLosses losses =
        subsampled_losses(model, decoder, s.theta, s.cloud, data, batch, prior);

    const std::size_t n_warm = s.cloud.N();
    Matrix x;
    Matrix y;
    gather(s.cloud, data, batch, x, y);
    std::vector<std::uint32_t> m_ids;
    std::vector<std::uint32_t> n_ids;
    for (std::uint32_t m : batch) {
      for (std::size_t n = 0; n < n_warm; ++n) {
        m_ids.push_back(m);
        n_ids.push_back(static_cast<std::uint32_t>(n));
      }
    }
    x = posterior_langevin(model, decoder, s.theta, std::move(x), y, m_ids, n_ids,
                           config.warmup.h, config.warmup.corrector_steps, noise, it,
                           NoiseRole::kWarmup);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      s.cloud.row(batch[r]) = x.middleCols(static_cast<Eigen::Index>(r * n_warm),
                                           static_cast<Eigen::Index>(n_warm));
    }
    apply_optimizers(s, losses);
    b.posterior += batch.size() * n_warm * config.warmup.corrector_steps;
    b.prior += batch.size() * config.J;
    return losses;
  };
  return run_epochs(config, model, decoder, data, hooks, std::move(state), budget, step);
}

TrainResult run_lebm_baseline(const RunConfig& config, const EnergyModel& model,
                              const Decoder& decoder, const Dataset& data, const Theta& theta0,
                              const RunHooks& hooks) {
  require_algorithm(config, {Algorithm::kLebmBaseline}, "run_lebm_baseline");
  config.validate(data.size());
  const NoiseStream noise(config.seed, config.zero_noise);
  TrainState state = initial_state(config, model, decoder, data, theta0);
  GradientBudget budget;
  budget.posterior_chains = data.size();

  auto step = [&](TrainState& s, std::span<const std::uint32_t> batch, GradientBudget& b) {
    const auto it = static_cast<std::uint32_t>(s.iteration);
    const Matrix prior =
        ula_prior_sample(model, s.theta.alpha, batch, config.gamma, config.J, noise, {.iteration = it});
    Matrix start = standard_normal_states(model.latent_dim(), batch, noise, it, NoiseRole::kLebmInit);
    Matrix y(static_cast<Eigen::Index>(data.dim()), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t r = 0; r < batch.size(); ++r) {
      y.col(static_cast<Eigen::Index>(r)) = data.y.col(batch[r]);
    }
    const std::vector<std::uint32_t> zeros(batch.size(), 0);
    const Matrix x = posterior_langevin(model, decoder, s.theta, std::move(start), y, batch, zeros,
                                        config.lebm.step_size, config.lebm.posterior_steps, noise,
                                        it, NoiseRole::kLebmPosterior);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      s.cloud.particle(batch[r], 0) = x.col(static_cast<Eigen::Index>(r));
    }
    const SubsampledLosses losses =
        subsampled_losses(model, decoder, s.theta, s.cloud, data, batch, prior);
    apply_optimizers(s, losses);
    b.posterior += batch.size() * config.lebm.posterior_steps;
    b.prior += batch.size() * config.J;
    return losses;
  };
  return run_epochs(config, model, decoder, data, hooks, std::move(state), budget, step);
}

TrainResult train(const RunConfig& config, const EnergyModel& model, const Decoder& decoder,
                  const Dataset& data, const Theta& theta0, const RunHooks& hooks) {
  switch (config.algorithm) {
    case Algorithm::kFullExact:
    case Algorithm::kFullInexact: return run_full(config, model, decoder, data, theta0, hooks);
    case Algorithm::kPractical: return run_practical(config, model, decoder, data, theta0, hooks);
    case Algorithm::kPracticalWarmup: return run_warmup(config, model, decoder, data, theta0, hooks);
    case Algorithm::kLebmBaseline:
      return run_lebm_baseline(config, model, decoder, data, theta0, hooks);
  }
  throw ConfigError("unknown algorithm");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "iteration,epoch,energy_loss,generator_loss,param_error,mmd\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.epoch) + ',' +
           format_double(r.energy_loss) + ',' + format_double(r.generator_loss) + ',' +
           format_double(r.param_error) + ',' + format_double(r.mmd) + '\n';
  }
  return out;
}

std::string timing_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "iteration,epoch,wall_ms\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.epoch) + ',' +
           format_double(r.wall_ms) + '\n';
  }
  return out;
}

}  // namespace ebipla
