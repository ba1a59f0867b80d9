#include "ebipla/mlp.hpp"

#include <cmath>
#include <cstring>

namespace ebipla {

namespace {

struct LayerView {
  Eigen::Map<const Matrix> weight;
  Eigen::Map<const Vector> bias;
};

std::vector<LayerView> views(const MlpSpec& spec, const Vector& params) {
  require_dim("mlp params", spec.param_count(), params.size());
  std::vector<LayerView> out;
  out.reserve(spec.layers());
  const double* p = params.data();
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const auto n_in = static_cast<Eigen::Index>(spec.layer_sizes[l]);
    const auto n_out = static_cast<Eigen::Index>(spec.layer_sizes[l + 1]);
    out.push_back({Eigen::Map<const Matrix>(p, n_out, n_in), Eigen::Map<const Vector>(p + n_out * n_in, n_out)});
    p += n_out * n_in + n_out;
  }
  return out;
}

// Four interleaved FNV-style lanes; a serial chain over ~30k parameters is latency bound.
std::uint64_t fingerprint(const Vector& params) {
  std::uint64_t lanes[4] = {0x84222325CBF29CE4ull, 0x9E3779B97F4A7C15ull, 0xC2B2AE3D27D4EB4Full,
                            0x165667B19E3779F9ull};
  const auto n = static_cast<std::size_t>(params.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, params.data() + i, sizeof bits);
    lanes[i % 4] = (lanes[i % 4] ^ bits) * 0x100000001B3ull;
  }
  std::uint64_t h = n;
  for (std::uint64_t lane : lanes) h = (h ^ lane) * 0x100000001B3ull;
  return h;
}

// Applies the activation to `z` in place and stores its derivative in `slope`.
// ReLU'(0) = 0. SiLU'(z) = s (1 + z (1 - s)) with s = sigmoid(z).
void activate(Activation act, Matrix& z, Matrix& slope) {
  auto a = z.array();
  if (act == Activation::kReLU) {
    slope = (a > 0.0).cast<double>().matrix();
    a = a.cwiseMax(0.0);
    return;
  }
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-a).exp());
  slope = (s * (1.0 + a * (1.0 - s))).matrix();
  a *= s;
}

void check_tape(const MlpSpec& spec, const Vector& params, const MlpTape& tape) {
  require_dim("mlp params", spec.param_count(), params.size());
  if (tape.slope.size() + 1 != spec.layers()) throw ConfigError("MLP tape: incomplete forward pass");
  if (tape.params_fingerprint != fingerprint(params)) {
    throw ConfigError("MLP tape: parameters changed since the forward pass");
  }
}

// Backpropagates `delta` (cotangent of the output pre-activation) down to the input,
// accumulating parameter gradients when `grad` is non-null.
Matrix backprop(const MlpSpec& spec, const Vector& params, const MlpTape& tape, Matrix delta,
                Vector* grad) {
  const auto layers = views(spec, params);
  std::vector<Eigen::Index> offsets(spec.layers());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    offsets[l] = offset;
    offset += layers[l].weight.size() + layers[l].bias.size();
  }
  for (std::size_t l = spec.layers(); l-- > 0;) {
    const Matrix& input = l == 0 ? tape.input : tape.post[l - 1];
    if (grad) {
      const auto& w = layers[l].weight;
      Eigen::Map<Matrix>(grad->data() + offsets[l], w.rows(), w.cols()).noalias() =
          delta * input.transpose();
      grad->segment(offsets[l] + w.size(), w.rows()) = delta.rowwise().sum();
    }
    Matrix upstream = layers[l].weight.transpose() * delta;
    if (l == 0) return upstream;
    delta = upstream.cwiseProduct(tape.slope[l - 1]);
  }
  return delta;
}

}  // namespace

std::string to_string(Activation activation) {
  return activation == Activation::kSiLU ? "silu" : "relu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "silu") return Activation::kSiLU;
  if (name == "relu") return Activation::kReLU;
  throw ConfigError("unknown activation '" + name + "' (expected silu or relu)");
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 3) throw ConfigError("MlpSpec: at least one hidden layer is required");
  if (layer_sizes.back() != 1) throw ConfigError("MlpSpec: output dimension must be 1");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ConfigError("MlpSpec: layer sizes must be positive");
  }
}

std::size_t MlpSpec::param_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    count += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return count;
}

std::vector<MlpLayer> unflatten(const MlpSpec& spec, const Vector& params) {
  std::vector<MlpLayer> out;
  for (const auto& v : views(spec, params)) out.push_back({v.weight, v.bias});
  return out;
}

Vector flatten(const MlpSpec& spec, const std::vector<MlpLayer>& layers) {
  require_dim("mlp layers", spec.layers(), layers.size());
  Vector out(static_cast<Eigen::Index>(spec.param_count()));
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require_dim("weight rows", spec.layer_sizes[l + 1], layers[l].weight.rows());
    require_dim("weight cols", spec.layer_sizes[l], layers[l].weight.cols());
    require_dim("bias", spec.layer_sizes[l + 1], layers[l].bias.size());
    const auto& w = layers[l].weight;
    Eigen::Map<Matrix>(out.data() + offset, w.rows(), w.cols()) = w;
    offset += w.size();
    out.segment(offset, layers[l].bias.size()) = layers[l].bias;
    offset += layers[l].bias.size();
  }
  return out;
}

Vector init_mlp_params(const MlpSpec& spec, const NoiseStream& noise, std::uint32_t stream) {
  spec.validate();
  Vector params = Vector::Zero(static_cast<Eigen::Index>(spec.param_count()));
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    const auto count = static_cast<Eigen::Index>(n_in * n_out);
    Vector u(count);
    noise.uniform({.k = stream, .role = NoiseRole::kParamInit, .m = static_cast<std::uint32_t>(l)},
                  {u.data(), static_cast<std::size_t>(count)});
    params.segment(offset, count) = (2.0 * u.array() - 1.0).matrix() * limit;
    offset += count + static_cast<Eigen::Index>(n_out);
  }
  return params;
}

MlpTape mlp_energy_forward(const MlpSpec& spec, const Vector& params, const Matrix& x) {
  require_dim("mlp input", spec.input_dim(), x.rows());
  const auto layers = views(spec, params);
  MlpTape tape;
  if (!x.allFinite()) throw NumericalError("MLP forward: non-finite input");
  tape.input = x;
  tape.params_fingerprint = fingerprint(params);
  tape.post.reserve(spec.layers() - 1);
  tape.slope.reserve(spec.layers() - 1);
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const Matrix& input = l == 0 ? tape.input : tape.post.back();
    Matrix z = layers[l].weight * input;
    z.colwise() += layers[l].bias;
    if (l + 1 == spec.layers()) {
      tape.energy = z.row(0).transpose();
      break;
    }
    Matrix slope;
    activate(spec.activation, z, slope);
    tape.post.push_back(std::move(z));
    tape.slope.push_back(std::move(slope));
  }
  // Overflow in any layer reaches the output, so one check suffices; locate it for the message.
  if (!tape.energy.allFinite()) {
    for (std::size_t l = 0; l < tape.post.size(); ++l) {
      if (!tape.post[l].allFinite()) {
        throw NumericalError("MLP forward: non-finite activation in layer " + std::to_string(l));
      }
    }
    throw NumericalError("MLP forward: non-finite energy");
  }
  return tape;
}

Matrix mlp_backward_x(const MlpSpec& spec, const Vector& params, const MlpTape& tape) {
  return mlp_backward_x(spec, params, tape, Vector::Ones(tape.input.cols()));
}

Matrix mlp_backward_x(const MlpSpec& spec, const Vector& params, const MlpTape& tape,
                      const Vector& upstream) {
  check_tape(spec, params, tape);
  require_dim("upstream", tape.input.cols(), upstream.size());
  return backprop(spec, params, tape, upstream.transpose(), nullptr);
}

Vector mlp_backward_params(const MlpSpec& spec, const Vector& params, const MlpTape& tape,
                           const Vector& upstream) {
  check_tape(spec, params, tape);
  require_dim("upstream", tape.input.cols(), upstream.size());
  Vector grad(params.size());
  backprop(spec, params, tape, upstream.transpose(), &grad);
  return grad;
}

MlpEnergy::MlpEnergy(MlpSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Vector MlpEnergy::energy(const Vector& alpha, const Matrix& x) const {
  return mlp_energy_forward(spec_, alpha, x).energy;
}

Matrix MlpEnergy::grad_x(const Vector& alpha, const Matrix& x) const {
  return mlp_backward_x(spec_, alpha, mlp_energy_forward(spec_, alpha, x));
}

Vector MlpEnergy::weighted_grad_alpha(const Vector& alpha, const Matrix& x,
                                      const Vector& weights) const {
  return mlp_backward_params(spec_, alpha, mlp_energy_forward(spec_, alpha, x), weights);
}

EnergyBatchEval MlpEnergy::evaluate(const Vector& alpha, const Matrix& x, double weight) const {
  const MlpTape tape = mlp_energy_forward(spec_, alpha, x);
  EnergyBatchEval out;
  out.energy = tape.energy;
  out.grad_alpha.resize(alpha.size());
  out.grad_x = backprop(spec_, alpha, tape, Vector::Ones(x.cols()).transpose(), &out.grad_alpha);
  out.grad_alpha *= weight;
  return out;
}

}  // namespace ebipla
