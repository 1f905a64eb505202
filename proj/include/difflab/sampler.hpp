#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "difflab/gaussian_oracle.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

enum class ScoreMode { ExactGaussian, Perturbed, Custom };

const char* score_mode_name(ScoreMode mode);
ScoreMode score_mode_from_name(const std::string& name);

struct SamplerConfig {
  int d = 1;
  long K = 1;
  double eta = 1.0;        // K * eta must equal the schedule horizon
  std::uint64_t seed = 0;
  long chains = 1;
  ScoreMode score_mode = ScoreMode::ExactGaussian;
  double score_error = 0.0;  // M, used when score_mode == Perturbed
  int threads = 1;
  bool store_states = false;
  // Step indices (ascending, in [1, K]) at which intermediate moments are
  // recorded alongside the terminal ones.
  std::vector<long> checkpoints;
};

// Identifies which (chain, step) a score evaluation belongs to, so wrappers
// that need randomness (the perturbed score) can draw from the run's counter
// RNG instead of hidden state.
struct ScoreCallContext {
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
  std::uint64_t step = 0;
};

// state vector, forward time, call context -> gradient written to out.
using ScoreFn = std::function<void(std::span<const double> x, double t_forward,
                                   const ScoreCallContext& ctx,
                                   std::span<double> out)>;

struct MomentCheckpoint {
  long step = 0;
  double mean = 0.0;
  double second_moment = 0.0;
};

struct RunResult {
  SamplerConfig config;
  double horizon_T = 0.0;
  double prior_variance = 0.0;
  // Aggregates over all chains and coordinates of the terminal state.
  double mean = 0.0;
  double second_moment = 0.0;
  std::vector<MomentCheckpoint> checkpoints;
  // Row-major chains x d terminal states; filled only when store_states is set.
  std::vector<double> terminal_states;
};

// Exact Gaussian score, evaluated from the kernel coefficients at each call.
ScoreFn make_exact_gaussian_score(const GaussianModel& model,
                                  const ScheduleSpec& spec);

// Same, but with the per-step coefficients precomputed for the K-step grid;
// the hot path for large chain counts.
ScoreFn make_exact_gaussian_score_table(const GaussianModel& model,
                                        const ScheduleSpec& spec, long K,
                                        double eta);

ScoreFn make_zero_score();

// Wraps `base` so each evaluation adds an independent Gaussian vector with
// per-coordinate variance M^2/d, i.e. E|added|^2 = M^2 exactly. This realizes
// a score-matching error of size M in L2(expectation), not per sample.
ScoreFn perturbed_score(ScoreFn base, double M);

// Runs the discrete reverse process
//   y_k = y_{k-1} + (int f) y_{k-1} + (int g^2) score(y_{k-1}, T-(k-1)eta)
//         + sqrt(int g^2) xi_k,
// with step integrals over [ (k-1)eta, k eta ] in reverse time and
// y_0 ~ N(0, a2(T) I). Chains run independently (config.threads of them at a
// time); moment accumulators merge in chain order, so results are
// bit-identical for any thread count.
RunResult run_reverse(const ScheduleSpec& spec, const SamplerConfig& config,
                      const ScoreFn& score);

// The same integrator on a 64x finer grid, as a discretization-error
// reference. The score must accept the refined step times.
RunResult run_fine_reference(const ScheduleSpec& spec,
                             const SamplerConfig& config, const ScoreFn& score);

SamplerConfig refine_config(const SamplerConfig& config, long factor = 64);

}  // namespace difflab
