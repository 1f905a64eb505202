#include "difflab/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace difflab {

namespace {

using nlohmann::json;

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

const json& require_key(const json& j, const std::string& path,
                        const std::string& key) {
  require_object(j, path);
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

double get_number(const json& j, const std::string& path, const std::string& key) {
  const json& v = require_key(j, path, key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

double get_number_or(const json& j, const std::string& path,
                     const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::optional<double> get_optional_number(const json& j, const std::string& path,
                                          const std::string& key) {
  if (!j.is_object() || !j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

long get_integer(const json& j, const std::string& path, const std::string& key) {
  const json& v = require_key(j, path, key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  return v.get<long>();
}

std::string get_string(const json& j, const std::string& path,
                       const std::string& key) {
  const json& v = require_key(j, path, key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

ScheduleSpec parse_schedule(const json& j) {
  const std::string path = "schedule";
  const std::string name = get_string(j, path, "family");
  Family family;
  try {
    family = family_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".family", e.what());
  }
  const double T = get_number(j, path, "horizon_T");
  try {
    switch (family) {
      case Family::VeExp:
        return ScheduleSpec::ve_exp(get_number(j, path, "a"),
                                    get_number(j, path, "b"), T);
      case Family::VeConst:
        return ScheduleSpec::ve_const(get_number(j, path, "a"), T);
      case Family::VeSqrt2At:
        return ScheduleSpec::ve_sqrt2at(get_number(j, path, "a"), T);
      case Family::VePoly:
        return ScheduleSpec::ve_poly(get_number(j, path, "a"),
                                     get_number(j, path, "b"),
                                     get_number(j, path, "c"), T);
      case Family::VpConst:
        return ScheduleSpec::vp_const(get_number(j, path, "beta_const"), T);
      case Family::VpLinear:
        return ScheduleSpec::vp_linear(get_number(j, path, "beta_min"),
                                       get_number(j, path, "beta_max"), T);
      case Family::VpPoly:
        return ScheduleSpec::vp_poly(get_number(j, path, "beta_min"),
                                     get_number(j, path, "beta_max"),
                                     get_number(j, path, "rho"), T);
      case Family::VpExp:
        return ScheduleSpec::vp_exp(get_number(j, path, "beta_min"),
                                    get_number(j, path, "beta_max"), T);
      case Family::Custom:
        throw ConfigError(path + ".family",
                          "custom schedules are API-only; pick a built-in family");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".family", "unknown family");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  require_object(j, "(root)");
  ExperimentConfig config;
  config.schedule = parse_schedule(require_key(j, "(root)", "schedule"));

  const json& data = require_key(j, "(root)", "data");
  const double sigma0_sq = get_number(data, "data", "sigma0_sq");
  const long d = get_integer(data, "data", "d");
  if (d < 1 || d > (1L << 30)) throw ConfigError("data.d", "d out of range");
  try {
    config.data = make_gaussian_model(sigma0_sq, static_cast<int>(d));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("data", e.what());
  }

  const json& sampler = require_key(j, "(root)", "sampler");
  config.sampler.d = static_cast<int>(d);
  config.sampler.K = get_integer(sampler, "sampler", "K");
  config.sampler.eta = get_number(sampler, "sampler", "eta");
  config.sampler.chains = get_integer(sampler, "sampler", "chains");
  {
    const json& v = require_key(sampler, "sampler", "seed");
    if (!(v.is_number_unsigned() ||
          (v.is_number_integer() && v.get<long long>() >= 0)))
      throw ConfigError("sampler.seed", "expected a nonnegative integer");
    config.sampler.seed = v.get<std::uint64_t>();
  }
  const std::string mode = get_string(sampler, "sampler", "score_mode");
  try {
    config.sampler.score_mode = score_mode_from_name(mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sampler.score_mode", e.what());
  }
  if (config.sampler.score_mode == ScoreMode::Custom)
    throw ConfigError("sampler.score_mode",
                      "custom scores are API-only; use exact_gaussian or perturbed");
  config.sampler.score_error = get_number_or(sampler, "sampler", "score_error", 0.0);
  if (config.sampler.score_error < 0.0)
    throw ConfigError("sampler.score_error", "must be nonnegative");
  // The thread count is an execution resource, not part of the experiment:
  // results are bit-identical for any value, so it lives on the CLI only.
  config.sampler.store_states = false;
  if (sampler.contains("store_states")) {
    if (!sampler.at("store_states").is_boolean())
      throw ConfigError("sampler.store_states", "expected a boolean");
    config.sampler.store_states = sampler.at("store_states").get<bool>();
  }

  const json bound = j.contains("bound_constants") ? j.at("bound_constants")
                                                   : json::object();
  if (!bound.is_object()) throw ConfigError("bound_constants", "expected an object");
  config.M = get_number_or(bound, "bound_constants", "M", 0.0);
  config.M1 = get_number_or(bound, "bound_constants", "M1", 0.0);
  if (config.M < 0.0) throw ConfigError("bound_constants.M", "must be nonnegative");
  if (config.M1 < 0.0) throw ConfigError("bound_constants.M1", "must be nonnegative");
  config.m0 = get_optional_number(bound, "bound_constants", "m0");
  config.L0 = get_optional_number(bound, "bound_constants", "L0");
  config.x_star_norm = get_optional_number(bound, "bound_constants", "x_star_norm");
  config.x0_l2 = get_optional_number(bound, "bound_constants", "x0_l2");
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json resolved_config(const ExperimentConfig& config) {
  json schedule;
  const ScheduleSpec& s = config.schedule;
  schedule["family"] = family_name(s.family);
  schedule["horizon_T"] = s.horizon_T;
  switch (s.family) {
    case Family::VeExp:
      schedule["a"] = s.a;
      schedule["b"] = s.b;
      break;
    case Family::VeConst:
    case Family::VeSqrt2At:
      schedule["a"] = s.a;
      break;
    case Family::VePoly:
      schedule["a"] = s.a;
      schedule["b"] = s.b;
      schedule["c"] = s.c;
      break;
    case Family::VpConst:
      schedule["beta_const"] = s.beta_min;
      break;
    case Family::VpLinear:
    case Family::VpExp:
      schedule["beta_min"] = s.beta_min;
      schedule["beta_max"] = s.beta_max;
      break;
    case Family::VpPoly:
      schedule["beta_min"] = s.beta_min;
      schedule["beta_max"] = s.beta_max;
      schedule["rho"] = s.rho;
      break;
    case Family::Custom:
      schedule["family"] = "custom";
      break;
  }

  const BoundContext ctx = bound_context_from(config);
  json j;
  j["schedule"] = schedule;
  j["data"] = {{"sigma0_sq", config.data.sigma0_sq}, {"d", config.data.d}};
  j["sampler"] = {{"K", config.sampler.K},
                  {"eta", config.sampler.eta},
                  {"chains", config.sampler.chains},
                  {"seed", config.sampler.seed},
                  {"score_mode", score_mode_name(config.sampler.score_mode)},
                  {"score_error", config.sampler.score_error},
                  {"store_states", config.sampler.store_states}};
  j["bound_constants"] = {{"M", ctx.M},
                          {"M1", ctx.M1},
                          {"m0", ctx.m0},
                          {"L0", ctx.L0},
                          {"x_star_norm", ctx.x_star_norm},
                          {"x0_l2", ctx.x0_l2},
                          {"x0_l2_is_bound", ctx.x0_l2_is_bound}};
  return j;
}

json reference_config() {
  ExperimentConfig config;
  config.schedule = ScheduleSpec::vp_linear(0.1, 20.0, 1.0);
  config.data = make_gaussian_model(0.64, 8);
  config.sampler.d = 8;
  config.sampler.K = 1000;
  config.sampler.eta = 0.001;
  config.sampler.chains = 20000;
  config.sampler.seed = 42;
  config.sampler.score_mode = ScoreMode::ExactGaussian;
  config.sampler.score_error = 0.0;
  config.sampler.store_states = false;
  return resolved_config(config);
}

BoundContext bound_context_from(const ExperimentConfig& config) {
  const double m0 = config.m0.value_or(config.data.implied_m0());
  const double L0 = config.L0.value_or(config.data.implied_l0());
  const double x_star = config.x_star_norm.value_or(0.0);
  std::optional<double> x0_l2 = config.x0_l2;
  if (!x0_l2.has_value() && !config.m0.has_value()) {
    // Pure Gaussian setup: the exact L2 norm is available.
    x0_l2 = config.data.x0_l2_exact();
  }
  return make_bound_context(config.schedule, config.data.d, config.sampler.K,
                            config.sampler.eta, m0, L0, config.M, config.M1,
                            x_star, x0_l2);
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_preamble(const json& config) {
  std::string out = "# format_version,1\n# config,";
  out += config.dump();
  out += '\n';
  return out;
}

std::string trace_to_csv(const VarianceTrace& trace, const json& config) {
  std::string out = csv_preamble(config);
  out += "k,sigma_hat_sq,alpha_int,g2_int\n";
  for (std::size_t k = 0; k < trace.sigma_hat_sq.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += csv_number(trace.sigma_hat_sq[k]);
    out += ',';
    out += k == 0 ? "0" : csv_number(trace.alpha_integrals[k - 1]);
    out += ',';
    out += k == 0 ? "0" : csv_number(trace.g2_integrals[k - 1]);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_states_file(const std::string& path, int d, long chains,
                       const std::vector<double>& states, const json& config) {
  if (states.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(chains))
    throw std::invalid_argument("terminal state matrix has the wrong size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[8] = {'D', 'L', 'S', 'T', 'A', 'T', 'E', 'S'};
  const std::uint32_t version = 1;
  const std::uint64_t d64 = static_cast<std::uint64_t>(d);
  const std::uint64_t chains64 = static_cast<std::uint64_t>(chains);
  const std::string cfg = config.dump();
  const std::uint64_t cfg_len = cfg.size();
  out.write(magic, sizeof magic);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&d64), sizeof d64);
  out.write(reinterpret_cast<const char*>(&chains64), sizeof chains64);
  out.write(reinterpret_cast<const char*>(&cfg_len), sizeof cfg_len);
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  out.write(reinterpret_cast<const char*>(states.data()),
            static_cast<std::streamsize>(states.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace difflab
