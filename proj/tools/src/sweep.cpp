#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebipla/errors.hpp"
#include "commands.hpp"

namespace ebipla::cli {

std::size_t SweepSpec::cells() const {
  std::size_t n = 1;
  for (const auto& axis : grid) n *= axis.values.size();
  return n;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ConfigError("sweep: grid is empty");
  for (const auto& axis : grid) {
    if (axis.path.empty()) throw ConfigError("sweep: axis without a path");
    if (axis.values.empty()) throw ConfigError("sweep: axis '" + axis.path + "' has no values");
  }
  if (seeds.empty()) throw ConfigError("sweep: no seeds");
}

SweepSpec parse_sweep(const json& section, std::uint64_t master_seed) {
  if (!section.is_object()) throw ConfigError("sweep: section must be an object");
  SweepSpec spec;
  for (const auto& [key, value] : section.items()) {
    if (key != "grid" && key != "seeds" && key != "num_seeds" && key != "_comment") {
      throw ConfigError("config: unknown key 'sweep." + key + "'");
    }
  }
  if (!section.contains("grid") || !section.at("grid").is_array()) {
    throw ConfigError("sweep: 'grid' must be an array of {path, values}");
  }
  for (const auto& axis : section.at("grid")) {
    if (!axis.is_object() || !axis.contains("path") || !axis.at("path").is_string() ||
        !axis.contains("values") || !axis.at("values").is_array() || axis.size() != 2) {
      throw ConfigError("sweep: each grid entry needs exactly 'path' (string) and 'values' (array)");
    }
    spec.grid.push_back({axis.at("path").get<std::string>(),
                         axis.at("values").get<std::vector<json>>()});
  }
  if (section.contains("seeds") && section.contains("num_seeds")) {
    throw ConfigError("sweep: give either 'seeds' or 'num_seeds', not both");
  }
  try {
    if (section.contains("seeds")) {
      spec.seeds = section.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const auto n = section.value("num_seeds", std::uint64_t{1});
      for (std::uint64_t i = 0; i < n; ++i) spec.seeds.push_back(split_seed(master_seed, i));
    }
  } catch (const json::exception&) {
    throw ConfigError("sweep: seeds must be non-negative integers");
  }
  spec.validate();
  return spec;
}

bool SweepResult::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; });
}

Summary summarize(std::span<const double> values) {
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  Summary s;
  s.count = v.size();
  if (v.empty()) {
    s.mean = s.stderr_mean = s.median = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_mean = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                    std::sqrt(static_cast<double>(v.size()));
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

namespace {

std::string cell_key(const SweepSpec& spec, const std::vector<std::size_t>& index) {
  std::string key;
  for (std::size_t a = 0; a < spec.grid.size(); ++a) {
    if (a > 0) key += ';';
    const json& v = spec.grid[a].values[index[a]];
    key += spec.grid[a].path + '=' + (v.is_string() ? v.get<std::string>() : v.dump());
  }
  return key;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

SweepResult run_sweep(const json& base, const SweepSpec& spec, std::ostream* log) {
  spec.validate();
  if (log) {
    *log << "sweep: " << spec.cells() << " cells x " << spec.seeds.size() << " seeds = "
         << spec.runs() << " runs\n";
  }
  SweepResult result;
  std::vector<std::size_t> index(spec.grid.size(), 0);
  for (std::size_t cell = 0; cell < spec.cells(); ++cell) {
    std::size_t rest = cell;
    for (std::size_t a = spec.grid.size(); a-- > 0;) {
      index[a] = rest % spec.grid[a].values.size();
      rest /= spec.grid[a].values.size();
    }
    const std::string key = cell_key(spec, index);
    for (std::uint64_t seed : spec.seeds) {
      RunRecord rec;
      rec.cell = cell;
      rec.cell_key = key;
      rec.seed = seed;
      try {
        json doc = base;
        for (std::size_t a = 0; a < spec.grid.size(); ++a) {
          set_path(doc, spec.grid[a].path, spec.grid[a].values[index[a]]);
        }
        const ExperimentConfig config = parse_config(doc, seed);
        const TrainOutcome outcome = run_experiment(config);
        const auto& metrics = outcome.result.metrics;
        rec.final_mmd = metrics.empty() ? std::numeric_limits<double>::quiet_NaN() : metrics.back().mmd;
        rec.final_param_error =
            metrics.empty() ? std::numeric_limits<double>::quiet_NaN() : metrics.back().param_error;
        rec.budget = outcome.result.budget;
        rec.wall_ms = outcome.result.wall_ms;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        rec.final_mmd = rec.final_param_error = std::numeric_limits<double>::quiet_NaN();
      }
      if (log) {
        *log << "  [" << key << ", seed " << seed << "] "
             << (rec.ok ? "mmd " + format_double(rec.final_mmd) : "FAILED: " + rec.error) << '\n';
      }
      result.runs.push_back(std::move(rec));
    }
  }

  const std::vector<std::pair<std::string, double (*)(const RunRecord&)>> metrics{
      {"final_mmd", [](const RunRecord& r) { return r.final_mmd; }},
      {"final_param_error", [](const RunRecord& r) { return r.final_param_error; }},
      {"posterior_per_epoch", [](const RunRecord& r) { return r.budget.posterior_per_epoch(); }},
      {"posterior_per_chain_per_epoch",
       [](const RunRecord& r) { return r.budget.posterior_per_chain_per_epoch(); }},
      {"prior_per_epoch",
       [](const RunRecord& r) {
         return r.budget.epochs == 0 ? 0.0
                                     : static_cast<double>(r.budget.prior) / static_cast<double>(r.budget.epochs);
       }},
  };
  for (std::size_t cell = 0; cell < spec.cells(); ++cell) {
    std::string key;
    for (const auto& [name, get] : metrics) {
      std::vector<double> values;
      for (const auto& r : result.runs) {
        if (r.cell != cell) continue;
        key = r.cell_key;
        if (r.ok) values.push_back(get(r));
      }
      const Summary s = summarize(values);
      result.aggregates.push_back({cell, key, name, s.count, s.mean, s.stderr_mean, s.median});
    }
  }
  return result;
}

std::string sweep_runs_csv(const SweepResult& result) {
  std::string out =
      "cell,seed,status,final_mmd,final_param_error,posterior_evals,prior_evals,epochs,"
      "posterior_per_epoch,posterior_per_chain_per_epoch,error\n";
  for (const auto& r : result.runs) {
    out += csv_field(r.cell_key) + ',' + std::to_string(r.seed) + ',' + (r.ok ? "ok" : "failed") +
           ',' + format_double(r.final_mmd) + ',' + format_double(r.final_param_error) + ',' +
           std::to_string(r.budget.posterior) + ',' + std::to_string(r.budget.prior) + ',' +
           std::to_string(r.budget.epochs) + ',' + format_double(r.budget.posterior_per_epoch()) +
           ',' + format_double(r.budget.posterior_per_chain_per_epoch()) + ',' +
           csv_field(r.error) + '\n';
  }
  return out;
}

std::string sweep_summary_csv(const SweepResult& result) {
  std::string out = "cell,metric,count,mean,stderr,median\n";
  for (const auto& a : result.aggregates) {
    out += csv_field(a.cell_key) + ',' + a.metric + ',' + std::to_string(a.count) + ',' +
           format_double(a.mean) + ',' + format_double(a.stderr_mean) + ',' +
           format_double(a.median) + '\n';
  }
  return out;
}

std::string sweep_timing_csv(const SweepResult& result) {
  std::string out = "cell,seed,wall_ms\n";
  for (const auto& r : result.runs) {
    out += csv_field(r.cell_key) + ',' + std::to_string(r.seed) + ',' + format_double(r.wall_ms) + '\n';
  }
  return out;
}

}  // namespace ebipla::cli
