#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "ebipla/checkpoint.hpp"
#include "ebipla/errors.hpp"
#include "ebipla/eval.hpp"
#include "ebipla/parallel.hpp"
#include "sweep.hpp"
#include "verify.hpp"

namespace ebipla::cli {

namespace {

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

json default_doc() { return json{{"schema_version", kConfigSchemaVersion}}; }

json load_doc(const CommonOptions& options) {
  return options.config ? read_json(*options.config) : default_doc();
}

void prepare(const CommonOptions& options) {
  set_worker_threads(resolve_thread_count(options.threads));
  std::filesystem::create_directories(options.out);
}

/// Maps exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

json metrics_json(const MetricsRecord& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"iteration", r.iteration},         {"epoch", r.epoch},
          {"energy_loss", num(r.energy_loss)}, {"generator_loss", num(r.generator_loss)},
          {"param_error", num(r.param_error)}, {"mmd", num(r.mmd)}};
}

json budget_json(const GradientBudget& b) {
  return {{"posterior_evals", b.posterior},
          {"prior_evals", b.prior},
          {"epochs", b.epochs},
          {"posterior_chains", b.posterior_chains},
          {"posterior_per_epoch", b.posterior_per_epoch()},
          {"posterior_per_chain_per_epoch", b.posterior_per_chain_per_epoch()}};
}

}  // namespace

TrainOutcome run_experiment(const ExperimentConfig& config) {
  const Dataset data = make_dataset(config);
  const auto model = make_energy_model(config);
  const auto decoder = make_decoder(config, data.dim());
  RunHooks hooks;
  hooks.theta_star = known_theta_star(config, data);
  hooks.mmd_reference = make_reference(config);
  const Theta theta0 = default_initial_theta(*model, *decoder, split_seed(config.run.seed, 3));
  return {config, train(config.run, *model, *decoder, data, theta0, hooks)};
}

void write_train_outputs(const TrainOutcome& outcome, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& result = outcome.result;
  write_file(dir / "config.json", to_json(outcome.config).dump(2) + "\n");
  write_file(dir / "metrics.csv", metrics_csv(result.metrics));
  write_file(dir / "timing.csv", timing_csv(result.metrics));

  Checkpoint ckpt;
  ckpt.theta = result.state.theta;
  ckpt.energy_model = outcome.config.model.energy;
  ckpt.decoder = outcome.config.decoder.type;
  ckpt.spec_json = to_json(outcome.config).at("model").dump();
  ckpt.step = result.state.iteration;
  save_checkpoint(ckpt, dir / "checkpoint");

  json summary;
  summary["algorithm"] = to_string(outcome.config.run.algorithm);
  summary["seed"] = outcome.config.run.seed;
  summary["iterations"] = result.state.iteration;
  summary["epochs"] = result.state.epoch;
  summary["final"] = result.metrics.empty() ? json(nullptr) : metrics_json(result.metrics.back());
  summary["budget"] = budget_json(result.budget);
  summary["checkpoint"] = "checkpoint";
  summary["config"] = to_json(outcome.config);
  summary["wall_ms"] = result.wall_ms;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

int cmd_gen_data(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = parse_config(load_doc(options), options.seed);
    if (config.data.path) throw ConfigError("gen-data: 'data.path' names an existing dataset");
    prepare(options);
    const Dataset data = make_dataset(config);
    save_dataset(data, options.out / "dataset");
    export_dataset_csv(data, options.out / "dataset.csv");
    out << "wrote " << data.size() << " points of dimension " << data.dim() << " to "
        << (options.out / "dataset").string() << ".{json,bin} and dataset.csv\n";
    return kExitOk;
  });
}

int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = parse_config(load_doc(options), options.seed);
    prepare(options);
    const TrainOutcome outcome = run_experiment(config);
    write_train_outputs(outcome, options.out);
    out << "trained " << to_string(config.run.algorithm) << " for " << outcome.result.state.iteration
        << " iterations; outputs in " << options.out.string() << '\n';
    if (!outcome.result.metrics.empty()) {
      const auto& last = outcome.result.metrics.back();
      out << "final energy_loss " << format_double(last.energy_loss) << ", generator_loss "
          << format_double(last.generator_loss) << ", mmd " << format_double(last.mmd) << '\n';
    }
    return kExitOk;
  });
}

int cmd_sweep(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    json doc = load_doc(options);
    if (!doc.contains("sweep")) throw ConfigError("sweep: config has no 'sweep' section");
    const std::uint64_t master = options.seed.value_or(doc.value("seed", std::uint64_t{0}));
    const SweepSpec spec = parse_sweep(doc.at("sweep"), master);
    doc.erase("sweep");
    parse_config(doc);  // reject a broken base before scheduling anything
    prepare(options);
    const SweepResult result = run_sweep(doc, spec, &out);
    write_file(options.out / "sweep_runs.csv", sweep_runs_csv(result));
    write_file(options.out / "sweep_summary.csv", sweep_summary_csv(result));
    write_file(options.out / "sweep_timing.csv", sweep_timing_csv(result));
    out << "wrote sweep_runs.csv, sweep_summary.csv, sweep_timing.csv to " << options.out.string()
        << '\n';
    if (!result.all_ok()) {
      err << "sweep: some runs failed (see sweep_runs.csv)\n";
      return kExitFailure;
    }
    return kExitOk;
  });
}

int cmd_eval_mmd(const CommonOptions& options, const std::filesystem::path& a,
                 const std::filesystem::path& b, double bandwidth, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    set_worker_threads(resolve_thread_count(options.threads));
    if (!(bandwidth > 0.0)) throw ConfigError("eval-mmd: bandwidth must be positive");
    const Matrix p = load_points(a);
    const Matrix q = load_points(b);
    const double value = mmd_unbiased(p, q, {.bandwidth = bandwidth});
    out << "mmd " << format_double(value) << '\n';
    if (options.out_explicit) {
      std::filesystem::create_directories(options.out);
      write_file(options.out / "mmd.json",
                 json{{"mmd", value}, {"bandwidth", bandwidth}, {"a", a.string()}, {"b", b.string()}}
                         .dump(2) +
                     "\n");
    }
    return kExitOk;
  });
}

int cmd_verify_bound(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json doc = load_doc(options);
    VerifySettings settings =
        parse_verify(doc.contains("verify") ? doc.at("verify") : json::object());
    if (options.seed) settings.seed = *options.seed;
    prepare(options);
    const VerifyReport report = run_verification(settings, out);
    write_file(options.out / "verify.csv", verify_csv(report));
    write_file(options.out / "zeta.csv", zeta_csv(report));
    return report.all_passed() ? kExitOk : kExitFailure;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interacting-particle Langevin training of latent energy-based models"};
  app.require_subcommand(1);
  CommonOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", options.threads, "Worker threads (0: EBIPLA_THREADS, then 1)");
  };
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset");
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  auto* sweep = app.add_subcommand("sweep", "Grid of training runs over seeds");
  auto* eval = app.add_subcommand("eval-mmd", "Unbiased MMD between two point files");
  auto* verify = app.add_subcommand("verify-bound", "Empirical checks of the convergence bounds");
  for (auto* sub : {gen, train_cmd, sweep, eval, verify}) add_common(sub);
  std::string a_path;
  std::string b_path;
  double bandwidth = 0.1;
  eval->add_option("--a", a_path, "First points file (CSV or dataset)")->required();
  eval->add_option("--b", b_path, "Second points file (CSV or dataset)")->required();
  eval->add_option("--bandwidth", bandwidth, "Kernel parameter in exp(-b ||x - y||^2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (!config_path.empty()) options.config = config_path;
  if (chosen->count("--seed") > 0) options.seed = seed;
  options.out = out_dir;
  options.out_explicit = chosen->count("--out") > 0;

  if (chosen == gen) return cmd_gen_data(options, out, err);
  if (chosen == train_cmd) return cmd_train(options, out, err);
  if (chosen == sweep) return cmd_sweep(options, out, err);
  if (chosen == eval) return cmd_eval_mmd(options, a_path, b_path, bandwidth, out, err);
  return cmd_verify_bound(options, out, err);
}

}  // namespace ebipla::cli
