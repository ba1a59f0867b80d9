#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebipla/model.hpp"
#include "ebipla/noise.hpp"

namespace ebipla {

enum class Activation { kSiLU, kReLU };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

/// Fully connected scalar-output network: layer_sizes = {d_x, hidden..., 1}.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::kSiLU;

  /// Throws ConfigError unless there is at least one hidden layer and a scalar output.
  void validate() const;
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t layers() const { return layer_sizes.size() - 1; }
  /// sum over layers of (n_in + 1) * n_out.
  std::size_t param_count() const;
};

/// Unflattened view of one layer. Flat layout, layer by layer: W (n_out x n_in,
/// column-major) followed by b (n_out).
struct MlpLayer {
  Matrix weight;
  Vector bias;
};

std::vector<MlpLayer> unflatten(const MlpSpec& spec, const Vector& params);
Vector flatten(const MlpSpec& spec, const std::vector<MlpLayer>& layers);

/// Uniform(-sqrt(6/(n_in+n_out)), +sqrt(6/(n_in+n_out))) weights, zero biases.
Vector init_mlp_params(const MlpSpec& spec, const NoiseStream& noise, std::uint32_t stream = 0);

/// Everything a backward pass needs from a forward pass over a batch.
struct MlpTape {
  Matrix input;
  std::vector<Matrix> post;   // activations fed into layer l + 1
  std::vector<Matrix> slope;  // activation derivative at each hidden pre-activation
  Vector energy;
  std::uint64_t params_fingerprint = 0;
};

/// Batched forward pass over the columns of `x`. Throws NumericalError on overflow.
MlpTape mlp_energy_forward(const MlpSpec& spec, const Vector& params, const Matrix& x);

/// Column-wise upstream[c] * grad_x U(x_c). Omitting `upstream` means all ones.
Matrix mlp_backward_x(const MlpSpec& spec, const Vector& params, const MlpTape& tape);
Matrix mlp_backward_x(const MlpSpec& spec, const Vector& params, const MlpTape& tape,
                      const Vector& upstream);
/// sum_c upstream[c] * grad_params U(x_c).
Vector mlp_backward_params(const MlpSpec& spec, const Vector& params, const MlpTape& tape,
                           const Vector& upstream);

/// Neural energy U_alpha(x) = MLP_alpha(x).
class MlpEnergy final : public EnergyModel {
 public:
  explicit MlpEnergy(MlpSpec spec);

  std::string name() const override { return "mlp"; }
  std::size_t latent_dim() const override { return spec_.input_dim(); }
  std::size_t param_dim() const override { return spec_.param_count(); }
  const MlpSpec& spec() const { return spec_; }

  Vector energy(const Vector& alpha, const Matrix& x) const override;
  Matrix grad_x(const Vector& alpha, const Matrix& x) const override;
  Vector weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                             const Vector& weights) const override;
  EnergyBatchEval evaluate(const Vector& alpha, const Matrix& x, double weight) const override;

 private:
  MlpSpec spec_;
};

}  // namespace ebipla
