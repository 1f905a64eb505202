#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "difflab/bounds.hpp"
#include "difflab/gaussian_oracle.hpp"
#include "difflab/sampler.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

// Schema violation with the offending field path ("sampler.chains", ...).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_path(field) {}
  std::string field_path;
};

// One experiment: a schedule, the Gaussian data model, the sampler geometry,
// and the bound constants. Everything the CLI commands need.
struct ExperimentConfig {
  ScheduleSpec schedule;
  GaussianModel data{1.0, 1};
  SamplerConfig sampler;
  double M = 0.0;
  double M1 = 0.0;
  // Overrides; when absent the Gaussian model supplies m0 = L0 = 1/sigma0^2,
  // x* = 0 and the exact |x0|_{L2}.
  std::optional<double> m0;
  std::optional<double> L0;
  std::optional<double> x_star_norm;
  std::optional<double> x0_l2;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// The fully resolved config (defaults substituted); round-trips through
// parse_config and is embedded in every output file.
nlohmann::json resolved_config(const ExperimentConfig& config);

// A complete default config, every knob explicit.
nlohmann::json reference_config();

BoundContext bound_context_from(const ExperimentConfig& config);

// Floats in CSV files carry 17 significant digits so they round-trip exactly.
std::string csv_number(double v);

// First lines of every CSV artifact: format version and the resolved config.
std::string csv_preamble(const nlohmann::json& config);

std::string trace_to_csv(const VarianceTrace& trace, const nlohmann::json& config);

void write_text_file(const std::string& path, const std::string& content);

// Flat binary terminal-state matrix: magic, version, d, chain count, the
// resolved config (length-prefixed JSON), then row-major 64-bit floats.
void write_states_file(const std::string& path, int d, long chains,
                       const std::vector<double>& states,
                       const nlohmann::json& config);

}  // namespace difflab
