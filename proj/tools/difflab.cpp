// difflab: batch experiment runner for reverse-diffusion sampling at desk
// scale. Configures a forward schedule and a Gaussian data model, runs the
// discrete reverse process, evaluates the exact variance recursion and the
// W2 convergence bound, and emits audited CSV/JSON artifacts.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "difflab/bounds.hpp"
#include "difflab/complexity.hpp"
#include "difflab/errors.hpp"
#include "difflab/gaussian_oracle.hpp"
#include "difflab/metrics.hpp"
#include "difflab/sampler.hpp"
#include "difflab/serialize.hpp"

namespace {

using difflab::BoundContext;
using difflab::BoundReport;
using difflab::ExperimentConfig;
using difflab::GaussianModel;
using difflab::MinimalKResult;
using difflab::Prescription;
using difflab::RunResult;
using difflab::ScheduleSpec;
using difflab::ScoreFn;
using difflab::ScoreMode;
using difflab::StepsizeReport;
using difflab::VarianceTrace;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

std::string out_path(const CommonFlags& flags, const std::string& name) {
  namespace fs = std::filesystem;
  fs::path dir = flags.out_dir;
  if (const char* env = std::getenv("DIFFLAB_OUT")) dir = env;
  fs::create_directories(dir);
  return (dir / name).string();
}

ExperimentConfig load_and_override(const CommonFlags& flags) {
  if (flags.config_path.empty())
    throw difflab::ConfigError("(cli)", "--config is required for this command");
  ExperimentConfig config = difflab::load_config_file(flags.config_path);
  if (flags.seed) config.sampler.seed = *flags.seed;
  if (flags.threads) config.sampler.threads = *flags.threads;
  return config;
}

json stepsize_to_json(const StepsizeReport& r) {
  return json{{"admissible", r.admissible},
              {"positive", r.positive},
              {"eta", r.eta},
              {"eta_max", r.eta_max},
              {"rhs_condition1", r.rhs_condition1},
              {"rhs_condition2", r.rhs_condition2},
              {"argmin_condition1", r.argmin_condition1},
              {"argmax_numerator", r.argmax_numerator},
              {"binding_condition", r.binding_condition},
              {"violation", r.violation},
              {"vp_agreement_max_diff", r.vp_agreement_max_diff}};
}

json bound_to_json(const BoundReport& r) {
  return json{{"total", r.total},
              {"prior_term", r.prior_term},
              {"sum_term", r.sum_term},
              {"c_integral", r.c_integral},
              {"c1", r.c1},
              {"c2", r.c2},
              {"x0_l2_is_bound", r.x0_l2_is_bound},
              {"factors", r.factors},
              {"h_values", r.h_values},
              {"brackets", r.brackets},
              {"mu_integrals", r.mu_integrals},
              {"g2_integrals", r.g2_integrals},
              {"stepsize", stepsize_to_json(r.stepsize)}};
}

int cmd_sample(const CommonFlags& flags) {
  const ExperimentConfig config = load_and_override(flags);
  const json resolved = difflab::resolved_config(config);
  const BoundContext ctx = difflab::bound_context_from(config);

  const StepsizeReport stepsize = difflab::stepsize_admissible(ctx);
  if (!stepsize.admissible) {
    std::string detail = stepsize.positive
                             ? "eta = " + difflab::csv_number(stepsize.eta) +
                                   " exceeds eta_max = " +
                                   difflab::csv_number(stepsize.eta_max) +
                                   " set by " + stepsize.binding_condition
                             : stepsize.violation;
    throw difflab::AdmissibilityError("inadmissible stepsize: " + detail);
  }

  ScoreFn score = difflab::make_exact_gaussian_score_table(
      config.data, config.schedule, config.sampler.K, config.sampler.eta);
  if (config.sampler.score_mode == ScoreMode::Perturbed)
    score = difflab::perturbed_score(std::move(score), config.sampler.score_error);

  const RunResult run = difflab::run_reverse(config.schedule, config.sampler, score);
  const VarianceTrace trace = difflab::variance_recursion(
      config.data, config.schedule, config.sampler.K, config.sampler.eta);
  const double sigma_hat_k_sq = trace.sigma_hat_sq.back();
  const BoundReport bound = difflab::w2_upper_bound(ctx);

  json out;
  out["format_version"] = 1;
  out["config"] = resolved;
  out["prior_variance"] = run.prior_variance;
  out["sigma_hat_K_sq"] = sigma_hat_k_sq;
  out["empirical_mean"] = run.mean;
  out["empirical_var"] = run.second_moment;
  out["w2_exact"] = difflab::w2_exact(config.data, std::sqrt(sigma_hat_k_sq));
  out["w2_moment_matched"] = difflab::w2_gaussian_isotropic(
      run.second_moment, config.data.sigma0_sq, config.data.d);
  out["w2_bound"] = bound.total;
  out["eta_max"] = stepsize.eta_max;
  out["contraction_violations"] = trace.contraction_violations;

  difflab::write_text_file(out_path(flags, "run.json"), out.dump(2) + "\n");
  difflab::write_text_file(out_path(flags, "trace.csv"),
                           difflab::trace_to_csv(trace, resolved));
  if (config.sampler.store_states)
    difflab::write_states_file(out_path(flags, "states.bin"), config.data.d,
                               config.sampler.chains, run.terminal_states,
                               resolved);
  std::cout << "sample: W2(exact) = " << out["w2_exact"].get<double>()
            << ", W2(bound) = " << bound.total << "\n";
  return 0;
}

int cmd_bound(const CommonFlags& flags) {
  const ExperimentConfig config = load_and_override(flags);
  const BoundContext ctx = difflab::bound_context_from(config);
  const BoundReport report = difflab::w2_upper_bound(ctx);
  json out;
  out["format_version"] = 1;
  out["config"] = difflab::resolved_config(config);
  out["bound"] = bound_to_json(report);
  difflab::write_text_file(out_path(flags, "bound.json"), out.dump(2) + "\n");
  std::cout << "bound: " << report.total << " (prior term " << report.prior_term
            << ", sum term " << report.sum_term << ")\n";
  return 0;
}

int cmd_check_stepsize(const CommonFlags& flags) {
  const ExperimentConfig config = load_and_override(flags);
  const BoundContext ctx = difflab::bound_context_from(config);
  const StepsizeReport report = difflab::stepsize_admissible(ctx);
  json out;
  out["format_version"] = 1;
  out["config"] = difflab::resolved_config(config);
  out["stepsize"] = stepsize_to_json(report);
  difflab::write_text_file(out_path(flags, "stepsize.json"), out.dump(2) + "\n");
  std::cout << (report.admissible ? "admissible" : "inadmissible")
            << ": eta = " << report.eta << ", eta_max = " << report.eta_max
            << "\n";
  return report.admissible ? 0 : 3;
}

std::vector<ScheduleSpec> default_families(double horizon) {
  return {ScheduleSpec::ve_exp(1.0, 1.0, horizon),
          ScheduleSpec::ve_const(1.0, horizon),
          ScheduleSpec::ve_sqrt2at(1.0, horizon),
          ScheduleSpec::ve_poly(1.0, 1.0, 1.0, horizon),
          ScheduleSpec::vp_const(1.0, horizon),
          ScheduleSpec::vp_linear(0.1, 20.0, horizon),
          ScheduleSpec::vp_poly(0.1, 20.0, 5.0, horizon),
          ScheduleSpec::vp_exp(0.1, 20.0, horizon)};
}

int cmd_complexity(const CommonFlags& flags, const std::vector<std::string>& family_names,
                   const std::vector<double>& eps_list, const std::vector<int>& d_list,
                   double m0, double L0, double x_star, double M1) {
  std::vector<ScheduleSpec> families;
  for (const ScheduleSpec& s : default_families(1.0)) {
    if (family_names.empty()) {
      families.push_back(s);
      continue;
    }
    for (const std::string& name : family_names)
      if (name == difflab::family_name(s.family)) families.push_back(s);
  }
  if (families.empty())
    throw std::invalid_argument("no known families selected");

  json config;
  config["eps"] = eps_list;
  config["d"] = d_list;
  config["constants"] = {{"m0", m0}, {"L0", L0}, {"x_star_norm", x_star}, {"M1", M1}};
  std::string csv = difflab::csv_preamble(config);
  csv += "family,params,eps,d,T,eta_max,M_max,K_min,order_label\n";
  for (const ScheduleSpec& family : families) {
    for (double eps : eps_list) {
      for (int d : d_list) {
        difflab::ComplexityQuery query{eps, d, m0, L0, x_star, M1};
        const Prescription p = difflab::prescribe(family, query);
        csv += difflab::family_name(p.family);
        csv += ",\"" + p.params + "\",";
        csv += difflab::csv_number(eps);
        csv += ',';
        csv += std::to_string(d);
        csv += ',';
        csv += difflab::csv_number(p.T_val);
        csv += ',';
        csv += difflab::csv_number(p.eta_max);
        csv += ',';
        csv += difflab::csv_number(p.M_max);
        csv += ',';
        csv += std::to_string(p.K_min);
        csv += ",\"" + p.order_label + "\"\n";
      }
    }
  }
  difflab::write_text_file(out_path(flags, "complexity.csv"), csv);
  std::cout << "complexity: wrote " << families.size() * eps_list.size() * d_list.size()
            << " rows\n";
  return 0;
}

int cmd_lower_bound(const CommonFlags& flags, double eps, double eta,
                    double max_horizon) {
  const ExperimentConfig config = load_and_override(flags);
  const MinimalKResult result = difflab::minimal_k_search(
      config.data, config.schedule, eps, eta, max_horizon);
  const double comparator = difflab::lower_bound_gaussian(
      difflab::ComplexityQuery{eps, config.data.d});
  json out;
  out["format_version"] = 1;
  out["config"] = difflab::resolved_config(config);
  out["eps"] = eps;
  out["eta"] = eta;
  out["achieved"] = result.achieved;
  out["K"] = result.k;
  out["w2"] = result.w2;
  out["sqrt_d_over_eps"] = comparator;
  difflab::write_text_file(out_path(flags, "lower_bound.json"), out.dump(2) + "\n");
  if (result.achieved)
    std::cout << "lower-bound: K = " << result.k << ", W2 = " << result.w2
              << " (comparator sqrt(d)/eps = " << comparator << ")\n";
  else
    std::cout << "lower-bound: target not achievable at this stepsize; best W2 = "
              << result.w2 << " at K = " << result.k << "\n";
  return 0;
}

int cmd_c0(const CommonFlags& flags, double eta) {
  const ExperimentConfig config = load_and_override(flags);
  const double c0 = difflab::compute_c0(config.data, config.schedule);

  // Richardson cross-check: (var(eta) - var(eta/2)) * 2/eta -> c0.
  const double T = config.schedule.horizon_T;
  const long K = std::max<long>(1, std::lround(T / eta));
  const double eta_adj = T / static_cast<double>(K);
  const VarianceTrace coarse =
      difflab::variance_recursion(config.data, config.schedule, K, eta_adj);
  const VarianceTrace fine =
      difflab::variance_recursion(config.data, config.schedule, 2 * K, eta_adj / 2.0);
  const double slope =
      (coarse.sigma_hat_sq.back() - fine.sigma_hat_sq.back()) * 2.0 / eta_adj;

  json out;
  out["format_version"] = 1;
  out["config"] = difflab::resolved_config(config);
  out["c0"] = c0;
  out["richardson_eta"] = eta_adj;
  out["richardson_slope"] = slope;
  out["relative_gap"] = std::fabs(slope - c0) / std::max(1e-300, std::fabs(c0));
  difflab::write_text_file(out_path(flags, "c0.json"), out.dump(2) + "\n");
  std::cout << "c0 = " << c0 << ", Richardson slope at eta = " << eta_adj
            << ": " << slope << "\n";
  return 0;
}

int cmd_schedule_dump(const CommonFlags& flags, int points) {
  const ExperimentConfig config = load_and_override(flags);
  const ScheduleSpec& spec = config.schedule;
  const json resolved = difflab::resolved_config(config);
  std::string csv = difflab::csv_preamble(resolved);
  csv += "t,f,g,a1,a2\n";
  for (int i = 0; i <= points; ++i) {
    const double t = spec.horizon_T * static_cast<double>(i) / points;
    const difflab::KernelParams kp = difflab::kernel_params(spec, t);
    csv += difflab::csv_number(t);
    csv += ',';
    csv += difflab::csv_number(spec.f(t));
    csv += ',';
    csv += difflab::csv_number(spec.g(t));
    csv += ',';
    csv += difflab::csv_number(kp.a1);
    csv += ',';
    csv += difflab::csv_number(kp.a2);
    csv += '\n';
  }
  difflab::write_text_file(out_path(flags, "schedule.csv"), csv);
  std::cout << "schedule-dump: wrote " << points + 1 << " rows\n";
  return 0;
}

json error_json(const std::string& type, const std::string& message) {
  return json{{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion sampler laboratory"};
  app.require_subcommand(0, 1);

  CommonFlags flags;
  std::string reference_path;
  app.add_option("--write-reference-config", reference_path,
                 "write a fully populated default config and exit");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "experiment config (JSON)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--threads", flags.threads, "override the chain thread count");
  };

  CLI::App* sample = app.add_subcommand("sample", "run the reverse sampler");
  add_common(sample);

  CLI::App* bound = app.add_subcommand("bound", "evaluate the W2 upper bound");
  add_common(bound);

  CLI::App* check = app.add_subcommand("check-stepsize", "stepsize admissibility report");
  add_common(check);

  CLI::App* complexity = app.add_subcommand("complexity", "iteration-complexity table");
  add_common(complexity);
  std::vector<std::string> family_names;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::vector<int> d_list{4, 16, 64};
  double m0 = 1.0, L0 = 1.0, x_star = 0.0, M1 = 0.0;
  complexity->add_option("--families", family_names, "subset of families")->delimiter(',');
  complexity->add_option("--eps", eps_list, "accuracy targets")->delimiter(',');
  complexity->add_option("--d", d_list, "dimensions")->delimiter(',');
  complexity->add_option("--m0", m0, "strong-convexity constant");
  complexity->add_option("--L0", L0, "smoothness constant");
  complexity->add_option("--x-star-norm", x_star, "norm of the mode of p0");
  complexity->add_option("--M1", M1, "time-Lipschitz score constant");

  CLI::App* lower = app.add_subcommand("lower-bound",
                                       "minimal K search on the exact recursion "
                                       "(fixed eta, growing horizon T = K eta)");
  add_common(lower);
  double lb_eps = 0.05, lb_eta = 1e-3, lb_max_horizon = 0.0;
  lower->add_option("--eps", lb_eps, "W2 target");
  lower->add_option("--eta", lb_eta, "fixed stepsize");
  lower->add_option("--max-horizon", lb_max_horizon, "optional cap on K*eta (0 = none)");

  CLI::App* c0 = app.add_subcommand("c0", "stepsize-expansion coefficient");
  add_common(c0);
  double c0_eta = 1e-3;
  c0->add_option("--eta", c0_eta, "stepsize for the Richardson cross-check");

  CLI::App* dump = app.add_subcommand("schedule-dump", "emit (t, f, g, a1, a2) grid");
  add_common(dump);
  int dump_points = 256;
  dump->add_option("--points", dump_points, "grid resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!reference_path.empty()) {
      difflab::write_text_file(reference_path,
                               difflab::reference_config().dump(2) + "\n");
      std::cout << "wrote reference config to " << reference_path << "\n";
      return 0;
    }
    if (sample->parsed()) return cmd_sample(flags);
    if (bound->parsed()) return cmd_bound(flags);
    if (check->parsed()) return cmd_check_stepsize(flags);
    if (complexity->parsed())
      return cmd_complexity(flags, family_names, eps_list, d_list, m0, L0, x_star, M1);
    if (lower->parsed()) return cmd_lower_bound(flags, lb_eps, lb_eta, lb_max_horizon);
    if (c0->parsed()) return cmd_c0(flags, c0_eta);
    if (dump->parsed()) return cmd_schedule_dump(flags, dump_points);
    std::cout << app.help() << "\n";
    return 0;
  } catch (const difflab::ConfigError& e) {
    std::cerr << error_json("config", e.what()).dump() << "\n";
    return 2;
  } catch (const difflab::AdmissibilityError& e) {
    std::cerr << error_json("admissibility", e.what()).dump() << "\n";
    return 3;
  } catch (const difflab::BudgetError& e) {
    std::cerr << error_json("budget", e.what()).dump() << "\n";
    return 4;
  } catch (const difflab::NumericError& e) {
    std::cerr << error_json("numeric", e.what()).dump() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << error_json("error", e.what()).dump() << "\n";
    return 1;
  }
}
