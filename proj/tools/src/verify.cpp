#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ebipla/dynamics.hpp"
#include "ebipla/errors.hpp"
#include "ebipla/testbeds.hpp"

namespace ebipla::cli {

VerifySettings parse_verify(const json& section) {
  if (!section.is_object()) throw ConfigError("config: 'verify' must be an object");
  VerifySettings s;
  json known = json::object();
  auto take = [&](const char* key, auto& field) {
    if (!section.contains(key)) return;
    known[key] = true;
    try {
      field = section.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config: 'verify.") + key + "' has the wrong type");
    }
  };
  take("M", s.M);
  take("dim", s.dim);
  take("data_mean", s.data_mean);
  take("data_std", s.data_std);
  take("N_values", s.N_values);
  take("h_values", s.h_values);
  take("K", s.K);
  take("burn_in", s.burn_in);
  take("seeds", s.seeds);
  take("max_scaling_ratio", s.max_scaling_ratio);
  take("rescaling_steps", s.rescaling_steps);
  take("rescaling_N", s.rescaling_N);
  take("rescaling_tolerance", s.rescaling_tolerance);
  take("J_values", s.J_values);
  take("zeta_replications", s.zeta_replications);
  take("zeta_chains", s.zeta_chains);
  take("zeta_gamma", s.zeta_gamma);
  take("zeta_scale", s.zeta_scale);
  take("zeta_dim", s.zeta_dim);
  take("seed", s.seed);
  for (const auto& [key, value] : section.items()) {
    if (!known.contains(key) && key != "_comment") {
      throw ConfigError("config: unknown key 'verify." + key + "'");
    }
  }
  if (s.M == 0 || s.dim == 0 || s.N_values.empty() || s.h_values.empty() || s.seeds == 0 ||
      s.burn_in >= s.K || s.J_values.empty() || s.zeta_replications < 2 || s.zeta_chains == 0 ||
      !(s.zeta_scale > 0.0) || !(s.zeta_gamma > 0.0)) {
    throw ConfigError("config: 'verify' needs non-empty grids, seeds >= 1, burn_in < K, "
                      "zeta_replications >= 2 and positive zeta settings");
  }
  return s;
}

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

void report(VerifyReport& r, std::ostream& out, std::string name, bool passed, std::string detail) {
  out << (passed ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  r.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

VerifyReport run_verification(const VerifySettings& s, std::ostream& out) {
  VerifyReport r;
  GaussianDataSpec spec{.M = s.M, .dim = s.dim, .mean = s.data_mean, .std = s.data_std,
                        .seed = split_seed(s.seed, 2)};
  const Dataset data = sample_gaussian(spec);
  const GaussianLocationModel model(s.dim);
  const IdentityDecoder decoder(s.dim, 1.0);
  const auto loc = profile_of_gaussian_location(data, 1);
  const Theta theta0{Vector::Zero(static_cast<Eigen::Index>(s.dim)), Vector()};

  for (double h : s.h_values) {
    const bool admissible = h > 0.0 && h <= loc.profile.h_max();
    report(r, out, "step restriction h=" + fmt(h), admissible,
           "h <= 2/(mu+L) = " + fmt(loc.profile.h_max()));
    if (!admissible) continue;
    ConcentrationConfig cc;
    cc.N_values = s.N_values;
    cc.h = h;
    cc.K = s.K;
    cc.burn_in = s.burn_in;
    cc.seeds = s.seeds;
    cc.seed = s.seed;
    cc.cloud_radius = loc.cloud_radius;
    const auto rows =
        pi_theta_concentration_check(model, decoder, data, theta0, loc.theta_star, loc.profile, cc);
    for (const auto& row : rows) {
      report(r, out, "bound N=" + std::to_string(row.N) + " h=" + fmt(h), row.rms_error <= row.bound,
             "rms error " + fmt(row.rms_error) + " <= bound " + fmt(row.bound));
      r.rows.push_back(row);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) decreasing &= rows[i].rms_error < rows[i - 1].rms_error;
    const double ratio = rows.back().rms_error / rows.front().rms_error;
    report(r, out, "N-scaling h=" + fmt(h), decreasing && ratio <= s.max_scaling_ratio,
           std::string(decreasing ? "strictly decreasing" : "NOT decreasing") + ", error(N=" +
               std::to_string(rows.back().N) + ")/error(N=" + std::to_string(rows.front().N) +
               ") = " + fmt(ratio) + " (limit " + fmt(s.max_scaling_ratio) + ")");
  }

  RescalingConfig rc;
  rc.N = s.rescaling_N;
  rc.h = s.h_values.back();
  rc.steps = s.rescaling_steps;
  rc.seed = s.seed;
  const double gap = rescaling_equivalence_check(model, decoder, data, theta0, rc);
  report(r, out, "rescaling equivalence", gap < s.rescaling_tolerance,
         "max |theta divergence| " + fmt(gap) + " < " + fmt(s.rescaling_tolerance));
  rc.desynchronize = true;
  const double control = rescaling_equivalence_check(model, decoder, data, theta0, rc);
  report(r, out, "rescaling negative control", control > s.rescaling_tolerance,
         "desynchronised noise gives divergence " + fmt(control));

  const GaussianScaleModel scale_model(s.zeta_dim);
  const Vector alpha = GaussianScaleModel::alpha_for_scale(s.zeta_scale);
  const NoiseStream noise(split_seed(s.seed, 4));
  std::string trace;
  bool monotone = true;
  for (std::size_t J : s.J_values) {
    ZetaRow row{J, measure_zeta_bias(scale_model, alpha, s.zeta_gamma, J, s.zeta_replications,
                                     noise, s.zeta_chains)};
    if (!r.zeta.empty()) monotone &= row.stats.bias_norm < r.zeta.back().stats.bias_norm;
    monotone &= std::isfinite(row.stats.variance);
    trace += (trace.empty() ? "" : ", ") + std::string("J=") + std::to_string(J) + ": |E zeta| " +
             fmt(row.stats.bias_norm) + ", var " + fmt(row.stats.variance);
    r.zeta.push_back(row);
  }
  report(r, out, "prior-expectation bias decreasing in J", monotone, trace);
  return r;
}

std::string verify_csv(const VerifyReport& report) {
  std::string out = "N,h,empirical_error,bound,envelope\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.N) + ',' + format_double(row.h) + ',' + format_double(row.rms_error) +
           ',' + format_double(row.bound) + ',' + format_double(row.envelope) + '\n';
  }
  return out;
}

std::string zeta_csv(const VerifyReport& report) {
  std::string out = "J,bias_norm,variance,replications\n";
  for (const auto& row : report.zeta) {
    out += std::to_string(row.J) + ',' + format_double(row.stats.bias_norm) + ',' +
           format_double(row.stats.variance) + ',' + std::to_string(row.stats.replications) + '\n';
  }
  return out;
}

}  // namespace ebipla::cli
