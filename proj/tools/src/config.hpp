#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebipla/dataset.hpp"
#include "ebipla/mlp.hpp"
#include "ebipla/model.hpp"
#include "ebipla/swiss_roll.hpp"
#include "ebipla/trainer.hpp"

namespace ebipla::cli {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

struct ModelSection {
  std::string energy = "mlp";  // mlp | gaussian_location | gaussian_scale
  std::vector<std::size_t> hidden{128, 128, 128};
  Activation activation = Activation::kSiLU;
  std::size_t latent_dim = 2;
  double prior_var = 1.0;
};

struct DecoderSection {
  std::string type = "linear";  // linear | identity
  double sigma = 0.05;
  bool bias = true;
};

/// y ~ N(mean, std^2 I) in `dim` dimensions.
struct GaussianDataSpec {
  std::size_t M = 100;
  std::size_t dim = 1;
  double mean = 1.0;
  double std = 1.4142135623730951;
  std::uint64_t seed = 0;
};

struct DataSection {
  std::optional<std::string> path;
  std::optional<SwissRollSpec> swiss_roll;
  std::optional<GaussianDataSpec> gaussian;
  double rotation_deg = 45.0;  // Swiss roll rotation
  /// Points file used as the MMD reference; defaults to a fresh Swiss roll draw.
  std::optional<std::string> reference;
};

/// A fully resolved experiment: every default filled in.
struct ExperimentConfig {
  RunConfig run;
  ModelSection model;
  DecoderSection decoder;
  DataSection data;
};

/// Step sizes (gamma, h) for the Swiss roll experiments. For the baseline N is the number
/// of posterior steps and h is the posterior step size. Empty outside the table.
struct StepSizes {
  double gamma;
  double h;
};
std::optional<StepSizes> swiss_roll_step_sizes(Algorithm algorithm, std::size_t N);

/// Parses and resolves a config document. `seed_override` replaces the "seed" field.
/// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = {});

/// Resolved echo; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& config);

std::unique_ptr<EnergyModel> make_energy_model(const ExperimentConfig& config);
std::unique_ptr<Decoder> make_decoder(const ExperimentConfig& config, std::size_t data_dim);

/// Loads or generates the training data.
Dataset make_dataset(const ExperimentConfig& config);
/// MMD reference samples, or nothing when MMD is disabled.
std::optional<Matrix> make_reference(const ExperimentConfig& config);
/// Known maximiser of the marginal likelihood (Gaussian location testbed only).
std::optional<Theta> known_theta_star(const ExperimentConfig& config, const Dataset& data);

/// y ~ N(mean, std^2 I), drawn with the data role of `spec.seed`.
Dataset sample_gaussian(const GaussianDataSpec& spec);

/// Sets a dotted key path ("lebm.posterior_steps") inside a raw config document.
void set_path(json& doc, const std::string& path, const json& value);

}  // namespace ebipla::cli
