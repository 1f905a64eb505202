#include "difflab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

constexpr double kDivergenceLimit = 1e12;

void validate_config(const ScheduleSpec& spec, const SamplerConfig& config) {
  if (config.d < 1) throw std::invalid_argument("d must be at least 1");
  if (config.K < 1) throw std::invalid_argument("K must be at least 1");
  if (!(config.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (config.chains < 1) throw std::invalid_argument("chains must be at least 1");
  if (config.threads < 1) throw std::invalid_argument("threads must be at least 1");
  const double T = spec.horizon_T;
  if (std::fabs(static_cast<double>(config.K) * config.eta - T) >
      1e-12 * std::max(1.0, T))
    throw std::invalid_argument("K * eta must equal the schedule horizon");
  long prev = 0;
  for (long cp : config.checkpoints) {
    if (cp <= prev || cp > config.K)
      throw std::invalid_argument("checkpoints must be ascending and in [1, K]");
    prev = cp;
  }
}

struct StepTable {
  std::vector<double> f_int;        // int f over the k-th reverse window
  std::vector<double> g2_int;       // int g^2 over the k-th reverse window
  std::vector<double> g2_int_sqrt;
  std::vector<double> t_forward;    // score evaluation time T - (k-1) eta
};

StepTable build_step_table(const ScheduleSpec& spec, long K, double eta) {
  const double T = spec.horizon_T;
  StepTable table;
  table.f_int.resize(static_cast<std::size_t>(K));
  table.g2_int.resize(static_cast<std::size_t>(K));
  table.g2_int_sqrt.resize(static_cast<std::size_t>(K));
  table.t_forward.resize(static_cast<std::size_t>(K));
  for (long k = 1; k <= K; ++k) {
    const double lo = (k == K) ? 0.0 : T - static_cast<double>(k) * eta;
    const double hi = T - static_cast<double>(k - 1) * eta;
    const std::size_t i = static_cast<std::size_t>(k - 1);
    table.f_int[i] = int_f(spec, lo, hi);
    table.g2_int[i] = int_g2(spec, lo, hi);
    table.g2_int_sqrt[i] = std::sqrt(table.g2_int[i]);
    table.t_forward[i] = hi;
  }
  return table;
}

}  // namespace

const char* score_mode_name(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::ExactGaussian: return "exact_gaussian";
    case ScoreMode::Perturbed: return "perturbed";
    case ScoreMode::Custom: return "custom";
  }
  return "unknown";
}

ScoreMode score_mode_from_name(const std::string& name) {
  if (name == "exact_gaussian") return ScoreMode::ExactGaussian;
  if (name == "perturbed") return ScoreMode::Perturbed;
  if (name == "custom") return ScoreMode::Custom;
  throw std::invalid_argument("unknown score mode: " + name);
}

ScoreFn make_exact_gaussian_score(const GaussianModel& model,
                                  const ScheduleSpec& spec) {
  return [model, spec](std::span<const double> x, double t_forward,
                       const ScoreCallContext&, std::span<double> out) {
    exact_score(model, spec, t_forward, x, out);
  };
}

ScoreFn make_exact_gaussian_score_table(const GaussianModel& model,
                                        const ScheduleSpec& spec, long K,
                                        double eta) {
  std::vector<double> coef(static_cast<std::size_t>(K) + 1, 0.0);
  const double T = spec.horizon_T;
  for (long k = 1; k <= K; ++k)
    coef[static_cast<std::size_t>(k)] =
        score_coefficient(model, spec, T - static_cast<double>(k - 1) * eta);
  return [coef = std::move(coef)](std::span<const double> x, double,
                                  const ScoreCallContext& ctx,
                                  std::span<double> out) {
    if (ctx.step == 0 || ctx.step >= coef.size())
      throw std::invalid_argument("tabulated score called off its step grid");
    const double c = coef[ctx.step];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -c * x[i];
  };
}

ScoreFn make_zero_score() {
  return [](std::span<const double>, double, const ScoreCallContext&,
            std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
}

ScoreFn perturbed_score(ScoreFn base, double M) {
  if (!(M >= 0.0)) throw std::invalid_argument("perturbation level M must be >= 0");
  if (M == 0.0) return base;
  return [base = std::move(base), M](std::span<const double> x, double t_forward,
                                     const ScoreCallContext& ctx,
                                     std::span<double> out) {
    base(x, t_forward, ctx, out);
    const double scale = M / std::sqrt(static_cast<double>(x.size()));
    GaussianStream noise(ctx.seed, ctx.chain, ctx.step, 2);
    for (double& v : out) v += scale * noise.next();
  };
}

RunResult run_reverse(const ScheduleSpec& spec, const SamplerConfig& config,
                      const ScoreFn& score) {
  validate_config(spec, config);
  if (!score) throw std::invalid_argument("score function must be callable");

  const double T = spec.horizon_T;
  const long K = config.K;
  const long chains = config.chains;
  const std::size_t d = static_cast<std::size_t>(config.d);
  const StepTable table = build_step_table(spec, K, config.eta);
  const double prior_sd = std::sqrt(kernel_params(spec, T).a2);

  std::vector<double> chain_sum(static_cast<std::size_t>(chains), 0.0);
  std::vector<double> chain_sum_sq(static_cast<std::size_t>(chains), 0.0);
  const std::size_t n_cp = config.checkpoints.size();
  std::vector<double> cp_sum(n_cp * static_cast<std::size_t>(chains), 0.0);
  std::vector<double> cp_sum_sq(n_cp * static_cast<std::size_t>(chains), 0.0);
  std::vector<double> states;
  if (config.store_states) states.resize(static_cast<std::size_t>(chains) * d);

  auto run_chain = [&](long chain_index) {
    std::vector<double> y(d), s(d);
    GaussianStream init(config.seed, static_cast<std::uint64_t>(chain_index), 0, 1);
    for (std::size_t i = 0; i < d; ++i) y[i] = prior_sd * init.next();
    ScoreCallContext ctx{config.seed, static_cast<std::uint64_t>(chain_index), 0};
    std::size_t next_cp = 0;
    for (long k = 1; k <= K; ++k) {
      const std::size_t ki = static_cast<std::size_t>(k - 1);
      ctx.step = static_cast<std::uint64_t>(k);
      score(y, table.t_forward[ki], ctx, s);
      GaussianStream xi(config.seed, ctx.chain, ctx.step, 0);
      const double fi = table.f_int[ki];
      const double gi = table.g2_int[ki];
      const double gs = table.g2_int_sqrt[ki];
      for (std::size_t i = 0; i < d; ++i) {
        y[i] += fi * y[i] + gi * s[i] + gs * xi.next();
        if (!(std::fabs(y[i]) <= kDivergenceLimit))
          throw DivergenceError(
              "chain " + std::to_string(chain_index) +
                  " diverged at step " + std::to_string(k),
              k);
      }
      if (next_cp < n_cp && config.checkpoints[next_cp] == k) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          sum += y[i];
          sum_sq += y[i] * y[i];
        }
        const std::size_t slot =
            next_cp * static_cast<std::size_t>(chains) +
            static_cast<std::size_t>(chain_index);
        cp_sum[slot] = sum;
        cp_sum_sq[slot] = sum_sq;
        ++next_cp;
      }
    }
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      sum += y[i];
      sum_sq += y[i] * y[i];
    }
    chain_sum[static_cast<std::size_t>(chain_index)] = sum;
    chain_sum_sq[static_cast<std::size_t>(chain_index)] = sum_sq;
    if (config.store_states)
      std::copy(y.begin(), y.end(),
                states.begin() + static_cast<std::size_t>(chain_index) * d);
  };

  const int threads = static_cast<int>(
      std::min<long>(config.threads, chains));
  if (threads <= 1) {
    for (long c = 0; c < chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));
    const long per = (chains + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long lo = static_cast<long>(t) * per;
      const long hi = std::min(chains, lo + per);
      pool.emplace_back([&, t, lo, hi] {
        try {
          for (long c = lo; c < hi; ++c) run_chain(c);
        } catch (...) {
          failures[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }

  // Merge in chain order: the reduction is identical for any thread count.
  const double n = static_cast<double>(chains) * static_cast<double>(d);
  double total = 0.0, total_sq = 0.0;
  for (long c = 0; c < chains; ++c) {
    total += chain_sum[static_cast<std::size_t>(c)];
    total_sq += chain_sum_sq[static_cast<std::size_t>(c)];
  }

  RunResult result;
  result.config = config;
  result.horizon_T = T;
  result.prior_variance = prior_sd * prior_sd;
  result.mean = total / n;
  result.second_moment = total_sq / n;
  result.checkpoints.resize(n_cp);
  for (std::size_t c = 0; c < n_cp; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (long ch = 0; ch < chains; ++ch) {
      s1 += cp_sum[c * static_cast<std::size_t>(chains) + static_cast<std::size_t>(ch)];
      s2 += cp_sum_sq[c * static_cast<std::size_t>(chains) + static_cast<std::size_t>(ch)];
    }
    result.checkpoints[c] = {config.checkpoints[c], s1 / n, s2 / n};
  }
  result.terminal_states = std::move(states);
  return result;
}

SamplerConfig refine_config(const SamplerConfig& config, long factor) {
  if (factor < 1) throw std::invalid_argument("refinement factor must be >= 1");
  SamplerConfig fine = config;
  fine.K = config.K * factor;
  fine.eta = config.eta / static_cast<double>(factor);
  return fine;
}

RunResult run_fine_reference(const ScheduleSpec& spec,
                             const SamplerConfig& config, const ScoreFn& score) {
  return run_reverse(spec, refine_config(config, 64), score);
}

}  // namespace difflab
