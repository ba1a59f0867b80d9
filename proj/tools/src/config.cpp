#include "config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "ebipla/errors.hpp"
#include "ebipla/testbeds.hpp"
#include "ebipla/theory.hpp"

namespace ebipla::cli {

namespace {

/// Reads fields of one JSON object, remembering which keys were consumed so that
/// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("config: '" + where() + "' must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  const json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  std::string path_of(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (used_.count(key) == 0 && key != "_comment") {
        throw ConfigError("config: unknown key '" + path_of(key) + "'");
      }
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config: '" + path_of(key) + "' has the wrong type or a negative value");
    }
  }

  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

AdamConfig parse_adam(const json* node, const std::string& path) {
  AdamConfig cfg;
  if (!node) return cfg;
  ObjectReader r(*node, path);
  cfg.lr = r.get("lr", cfg.lr);
  cfg.beta1 = r.get("beta1", cfg.beta1);
  cfg.beta2 = r.get("beta2", cfg.beta2);
  cfg.eps = r.get("eps", cfg.eps);
  cfg.decay = r.get("decay", cfg.decay);
  r.finish();
  if (!(cfg.lr > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.eps > 0.0) || !(cfg.decay > 0.0)) {
    throw ConfigError("config: '" + path + "' needs lr > 0, beta1/beta2 in [0, 1), eps > 0, decay > 0");
  }
  return cfg;
}

json adam_json(const AdamConfig& cfg) {
  return {{"lr", cfg.lr}, {"beta1", cfg.beta1}, {"beta2", cfg.beta2}, {"eps", cfg.eps},
          {"decay", cfg.decay}};
}

}  // namespace

std::optional<StepSizes> swiss_roll_step_sizes(Algorithm algorithm, std::size_t N) {
  const bool lebm = algorithm == Algorithm::kLebmBaseline;
  switch (N) {
    case 4: return lebm ? StepSizes{0.003, 0.005} : StepSizes{0.005, 0.9};
    case 16: return lebm ? StepSizes{0.006, 0.005} : StepSizes{0.007, 0.9};
    case 32: return lebm ? StepSizes{0.002, 0.005} : StepSizes{0.007, 0.9};
    case 64: return lebm ? StepSizes{0.005, 0.02} : StepSizes{0.009, 0.9};
    default: return std::nullopt;
  }
}

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  ObjectReader root(doc, "");
  const auto version = root.optional<int>("schema_version");
  if (!version) throw ConfigError("config: missing 'schema_version'");
  if (*version != kConfigSchemaVersion) {
    throw ConfigError("config: schema_version " + std::to_string(*version) +
                      " is not supported (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  root.has("sweep");   // consumed by the sweep subcommand
  root.has("verify");  // consumed by the verify-bound subcommand

  ExperimentConfig c;
  RunConfig& run = c.run;
  run.algorithm = algorithm_from_string(root.get<std::string>("algorithm", "practical"));
  run.seed = root.get<std::uint64_t>("seed", 0);
  if (seed_override) run.seed = *seed_override;
  run.K = root.get<std::size_t>("K", 1);
  run.N = root.get<std::size_t>("N", 16);
  run.J = root.get<std::size_t>("J", 60);
  run.batch_size = root.get<std::size_t>("batch_size", 1000);
  run.init_particle_std = root.get("init_particle_std", 1.0);
  run.metric_cadence = root.get<std::size_t>("metric_cadence", 0);
  run.zero_noise = root.get("zero_noise", false);
  const auto h = root.optional<double>("h");
  const auto gamma = root.optional<double>("gamma");
  const json* step_scale = root.child("posterior_step_scale");

  // Model and decoder.
  const bool lebm = run.algorithm == Algorithm::kLebmBaseline;
  {
    const json* node = root.child("model");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "model");
    c.model.energy = r.get<std::string>("energy", "mlp");
    if (c.model.energy != "mlp" && c.model.energy != "gaussian_location" &&
        c.model.energy != "gaussian_scale") {
      throw ConfigError("config: 'model.energy' must be mlp, gaussian_location or gaussian_scale");
    }
    c.model.hidden = r.get("hidden", c.model.hidden);
    c.model.activation = activation_from_string(r.get<std::string>("activation", lebm ? "relu" : "silu"));
    c.model.latent_dim = r.get<std::size_t>("latent_dim", c.model.energy == "mlp" ? 2 : 1);
    c.model.prior_var = r.get("prior_var", 1.0);
    r.finish();
    if (c.model.latent_dim == 0) throw ConfigError("config: 'model.latent_dim' must be positive");
    if (!(c.model.prior_var > 0.0)) throw ConfigError("config: 'model.prior_var' must be positive");
  }
  {
    const json* node = root.child("decoder");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "decoder");
    const bool neural = c.model.energy == "mlp";
    c.decoder.type = r.get<std::string>("type", neural ? "linear" : "identity");
    if (c.decoder.type != "linear" && c.decoder.type != "identity") {
      throw ConfigError("config: 'decoder.type' must be linear or identity");
    }
    c.decoder.sigma = r.get("sigma", neural ? 0.05 : 1.0);
    c.decoder.bias = r.get("bias", true);
    r.finish();
    if (!(c.decoder.sigma > 0.0)) throw ConfigError("config: 'decoder.sigma' must be positive");
  }
  {
    const json* node = root.child("optimizer");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "optimizer");
    const auto kind = r.get<std::string>("kind", "adam");
    if (kind == "adam") {
      run.optimizer = OptimizerKind::kAdam;
    } else if (kind == "sgd") {
      run.optimizer = OptimizerKind::kSgd;
    } else {
      throw ConfigError("config: 'optimizer.kind' must be adam or sgd");
    }
    run.energy_optimizer = parse_adam(r.child("energy"), "optimizer.energy");
    run.generator_optimizer = parse_adam(r.child("generator"), "optimizer.generator");
    r.finish();
  }
  {
    const json* node = root.child("warmup");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "warmup");
    run.warmup.iterations = r.get("iterations", run.warmup.iterations);
    run.warmup.h = r.get("h", run.warmup.h);
    run.warmup.initial_particles = r.get("initial_particles", run.warmup.initial_particles);
    run.warmup.corrector_steps = r.get("corrector_steps", run.warmup.corrector_steps);
    r.finish();
  }
  std::optional<double> lebm_step;
  {
    const json* node = root.child("lebm");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "lebm");
    run.lebm.posterior_steps = r.get("posterior_steps", run.N);
    lebm_step = r.optional<double>("step_size");
    r.finish();
  }

  // Step sizes: explicit values win, otherwise the Swiss roll table.
  const std::size_t table_key = lebm ? run.lebm.posterior_steps : run.N;
  const auto table = swiss_roll_step_sizes(run.algorithm, table_key);
  auto need_table = [&](const char* key) {
    if (!table) {
      throw ConfigError(std::string("config: '") + key + "' is not set and there is no default step size for " +
                        (lebm ? "posterior_steps = " : "N = ") + std::to_string(table_key) +
                        " (defaults exist for 4, 16, 32, 64)");
    }
    return *table;
  };
  if (run.algorithm == Algorithm::kFullExact) {
    run.gamma = gamma.value_or(0.0);
  } else {
    run.gamma = gamma ? *gamma : need_table("gamma").gamma;
  }
  if (lebm) {
    run.h = h.value_or(0.0);
    run.lebm.step_size = lebm_step ? *lebm_step : need_table("lebm.step_size").h;
  } else {
    run.h = h ? *h : need_table("h").h;
    run.lebm.step_size = lebm_step.value_or(run.lebm.step_size);
  }

  // Minibatch training of a neural model measures h in units of the decoder variance by default.
  if (!step_scale || step_scale->is_null()) {
    const bool scaled = is_minibatch(run.algorithm) && !lebm && c.model.energy == "mlp";
    run.posterior_step_scale = scaled ? c.decoder.sigma * c.decoder.sigma : 1.0;
  } else if (step_scale->is_string()) {
    const auto name = step_scale->get<std::string>();
    if (name == "decoder_variance") {
      run.posterior_step_scale = c.decoder.sigma * c.decoder.sigma;
    } else if (name == "none") {
      run.posterior_step_scale = 1.0;
    } else {
      throw ConfigError("config: 'posterior_step_scale' must be a number, \"none\" or "
                        "\"decoder_variance\"");
    }
  } else if (step_scale->is_number()) {
    run.posterior_step_scale = step_scale->get<double>();
  } else {
    throw ConfigError("config: 'posterior_step_scale' must be a number or a string");
  }

  {
    const json* node = root.child("convexity");
    if (node) {
      ObjectReader r(*node, "convexity");
      run.mu = r.optional<double>("mu");
      run.smoothness = r.optional<double>("L");
      r.finish();
    }
  }

  // Data.
  {
    const json* node = root.child("data");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "data");
    c.data.path = r.optional<std::string>("path");
    c.data.reference = r.optional<std::string>("reference");
    if (const json* sr = r.child("swiss_roll")) {
      ObjectReader s(*sr, "data.swiss_roll");
      SwissRollSpec spec;
      spec.M = s.get("M", spec.M);
      spec.t_min = s.get("t_min", spec.t_min);
      spec.t_max = s.get("t_max", spec.t_max);
      spec.scale = s.get("scale", spec.scale);
      spec.noise_std = s.get("noise_std", spec.noise_std);
      c.data.rotation_deg = s.get("rotation_deg", c.data.rotation_deg);
      spec.rotation = SwissRollSpec::rotation_matrix(c.data.rotation_deg * std::numbers::pi / 180.0);
      spec.seed = s.get<std::uint64_t>("seed", split_seed(run.seed, 2));
      s.finish();
      spec.validate();
      c.data.swiss_roll = spec;
    }
    if (const json* g = r.child("gaussian")) {
      ObjectReader s(*g, "data.gaussian");
      GaussianDataSpec spec;
      spec.M = s.get("M", spec.M);
      spec.dim = s.get("dim", spec.dim);
      spec.mean = s.get("mean", spec.mean);
      spec.std = s.get("std", spec.std);
      spec.seed = s.get<std::uint64_t>("seed", split_seed(run.seed, 2));
      s.finish();
      if (spec.M == 0 || spec.dim == 0 || !(spec.std >= 0.0)) {
        throw ConfigError("config: 'data.gaussian' needs M > 0, dim > 0, std >= 0");
      }
      c.data.gaussian = spec;
    }
    r.finish();
    const int sources = (c.data.path ? 1 : 0) + (c.data.swiss_roll ? 1 : 0) + (c.data.gaussian ? 1 : 0);
    if (sources > 1) {
      throw ConfigError("config: 'data' must name exactly one of path, swiss_roll, gaussian");
    }
    if (sources == 0) {
      SwissRollSpec spec;
      spec.seed = split_seed(run.seed, 2);
      c.data.swiss_roll = spec;
    }
  }

  {
    const json* node = root.child("eval");
    const json empty = json::object();
    ObjectReader r(node ? *node : empty, "eval");
    run.eval.enabled = r.get("enabled", run.eval.enabled);
    run.eval.mmd_samples = r.get("mmd_samples", run.eval.mmd_samples);
    run.eval.prior_steps = r.get("prior_steps", run.eval.prior_steps);
    run.eval.gamma = r.get("gamma", run.gamma);
    run.eval.bandwidth = r.get("bandwidth", run.eval.bandwidth);
    r.finish();
  }
  root.finish();

  if (c.model.energy != "mlp" && c.decoder.type == "identity" &&
      c.model.latent_dim != (c.data.gaussian ? c.data.gaussian->dim : c.model.latent_dim)) {
    throw ConfigError("config: identity decoder needs model.latent_dim equal to the data dimension");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, seed_override);
}

json to_json(const ExperimentConfig& c) {
  const RunConfig& run = c.run;
  const bool lebm = run.algorithm == Algorithm::kLebmBaseline;
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["algorithm"] = to_string(run.algorithm);
  doc["seed"] = run.seed;
  doc["K"] = run.K;
  doc["N"] = run.N;
  doc["J"] = run.J;
  doc["h"] = lebm ? json(nullptr) : json(run.h);
  doc["posterior_step_scale"] = run.posterior_step_scale;
  doc["gamma"] = run.algorithm == Algorithm::kFullExact ? json(nullptr) : json(run.gamma);
  doc["batch_size"] = run.batch_size;
  doc["init_particle_std"] = run.init_particle_std;
  doc["metric_cadence"] = run.metric_cadence;
  doc["zero_noise"] = run.zero_noise;
  doc["model"] = {{"energy", c.model.energy},
                  {"hidden", c.model.hidden},
                  {"activation", to_string(c.model.activation)},
                  {"latent_dim", c.model.latent_dim},
                  {"prior_var", c.model.prior_var}};
  doc["decoder"] = {{"type", c.decoder.type}, {"sigma", c.decoder.sigma}, {"bias", c.decoder.bias}};
  doc["optimizer"] = {{"kind", run.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
                      {"energy", adam_json(run.energy_optimizer)},
                      {"generator", adam_json(run.generator_optimizer)}};
  doc["warmup"] = {{"iterations", run.warmup.iterations},
                   {"h", run.warmup.h},
                   {"initial_particles", run.warmup.initial_particles},
                   {"corrector_steps", run.warmup.corrector_steps}};
  doc["lebm"] = {{"posterior_steps", run.lebm.posterior_steps}, {"step_size", run.lebm.step_size}};
  if (run.mu) doc["convexity"] = {{"mu", *run.mu}, {"L", *run.smoothness}};
  json data = json::object();
  if (c.data.path) data["path"] = *c.data.path;
  if (c.data.reference) data["reference"] = *c.data.reference;
  if (c.data.swiss_roll) {
    const auto& s = *c.data.swiss_roll;
    data["swiss_roll"] = {{"M", s.M},         {"t_min", s.t_min},
                          {"t_max", s.t_max}, {"scale", s.scale},
                          {"noise_std", s.noise_std}, {"rotation_deg", c.data.rotation_deg},
                          {"seed", s.seed}};
  }
  if (c.data.gaussian) {
    const auto& g = *c.data.gaussian;
    data["gaussian"] = {{"M", g.M}, {"dim", g.dim}, {"mean", g.mean}, {"std", g.std}, {"seed", g.seed}};
  }
  doc["data"] = data;
  doc["eval"] = {{"enabled", run.eval.enabled},
                 {"mmd_samples", run.eval.mmd_samples},
                 {"prior_steps", run.eval.prior_steps},
                 {"gamma", run.eval.gamma},
                 {"bandwidth", run.eval.bandwidth}};
  return doc;
}

std::unique_ptr<EnergyModel> make_energy_model(const ExperimentConfig& c) {
  if (c.model.energy == "gaussian_location") {
    return std::make_unique<GaussianLocationModel>(c.model.latent_dim, c.model.prior_var);
  }
  if (c.model.energy == "gaussian_scale") {
    return std::make_unique<GaussianScaleModel>(c.model.latent_dim);
  }
  MlpSpec spec;
  spec.layer_sizes.push_back(c.model.latent_dim);
  spec.layer_sizes.insert(spec.layer_sizes.end(), c.model.hidden.begin(), c.model.hidden.end());
  spec.layer_sizes.push_back(1);
  spec.activation = c.model.activation;
  return std::make_unique<MlpEnergy>(spec);
}

std::unique_ptr<Decoder> make_decoder(const ExperimentConfig& c, std::size_t data_dim) {
  if (c.decoder.type == "identity") {
    if (data_dim != c.model.latent_dim) {
      throw ConfigError("identity decoder: data dimension " + std::to_string(data_dim) +
                        " differs from model.latent_dim " + std::to_string(c.model.latent_dim));
    }
    return std::make_unique<IdentityDecoder>(data_dim, c.decoder.sigma);
  }
  return std::make_unique<LinearDecoder>(c.model.latent_dim, data_dim, c.decoder.sigma,
                                         c.decoder.bias);
}

Dataset sample_gaussian(const GaussianDataSpec& spec) {
  const NoiseStream noise(spec.seed);
  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(spec.dim), static_cast<Eigen::Index>(spec.M));
  for (std::size_t m = 0; m < spec.M; ++m) {
    noise.normal({.role = NoiseRole::kData, .m = static_cast<std::uint32_t>(m)},
                 {data.y.col(static_cast<Eigen::Index>(m)).data(), spec.dim});
  }
  data.y = (data.y.array() * spec.std + spec.mean).matrix();
  data.provenance.generator = "gaussian";
  data.provenance.seed = spec.seed;
  data.provenance.params_json = json{{"M", spec.M}, {"dim", spec.dim}, {"mean", spec.mean},
                                     {"std", spec.std}}
                                    .dump();
  return data;
}

Dataset make_dataset(const ExperimentConfig& c) {
  if (c.data.path) {
    const std::filesystem::path p(*c.data.path);
    if (p.extension() == ".csv") {
      Dataset d;
      d.y = load_points(p);
      d.provenance.generator = "csv";
      return d;
    }
    return load_dataset(p);
  }
  if (c.data.gaussian) return sample_gaussian(*c.data.gaussian);
  return sample_swiss_roll(*c.data.swiss_roll);
}

std::optional<Matrix> make_reference(const ExperimentConfig& c) {
  if (!c.run.eval.enabled) return std::nullopt;
  if (c.data.reference) return load_points(*c.data.reference);
  if (c.data.swiss_roll) {
    SwissRollSpec spec = *c.data.swiss_roll;
    spec.M = c.run.eval.mmd_samples;
    spec.seed = split_seed(spec.seed, 1);
    return sample_swiss_roll(spec).y;
  }
  throw ConfigError("config: eval.enabled needs 'data.reference' unless the data is a Swiss roll");
}

std::optional<Theta> known_theta_star(const ExperimentConfig& c, const Dataset& data) {
  if (c.model.energy != "gaussian_location" || c.decoder.type != "identity") return std::nullopt;
  return profile_of_gaussian_location(data, c.run.N, c.model.prior_var,
                                      c.decoder.sigma * c.decoder.sigma)
      .theta_star;
}

void set_path(json& doc, const std::string& path, const json& value) {
  if (path.empty()) throw ConfigError("sweep: empty parameter path");
  json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("sweep: malformed parameter path '" + path + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("sweep: '" + path + "' crosses a non-object value");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

}  // namespace ebipla::cli
