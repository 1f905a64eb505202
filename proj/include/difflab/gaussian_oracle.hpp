#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "difflab/schedule.hpp"

namespace difflab {

// Isotropic Gaussian data, p0 = N(0, sigma0_sq I_d). Everything downstream of
// this model is available in closed form, which is what makes it usable as
// ground truth for the sampler and the bound machinery.
struct GaussianModel {
  double sigma0_sq = 1.0;
  int d = 1;

  double sigma0() const;
  // -log p0 is quadratic, so both regularity constants equal 1/sigma0_sq.
  double implied_m0() const { return 1.0 / sigma0_sq; }
  double implied_l0() const { return 1.0 / sigma0_sq; }
  // Exact L2 norm of x0 ~ p0 (not the generic upper bound).
  double x0_l2_exact() const;
};

GaussianModel make_gaussian_model(double sigma0_sq, int d);

// Per-coordinate variance evolution of the discrete reverse chain, together
// with the step integrals that drive it.
struct VarianceTrace {
  std::vector<double> sigma_hat_sq;      // K+1 entries, index 0 = prior
  std::vector<double> alpha_integrals;   // K entries, step k at index k-1
  std::vector<double> g2_integrals;      // K entries
  // Steps whose alpha integral reached 1 (the (1 - int alpha) factor leaves
  // the contraction regime). The recursion still runs through them.
  std::vector<long> contraction_violations;
};

// Scalar coefficient of the exact score: score(x, t) = -coef(t) x.
double score_coefficient(const GaussianModel& model, const ScheduleSpec& spec,
                         double t);

// grad log p_t(x) = -x / (a1(t)^2 sigma0^2 + a2(t)), written into `out`.
void exact_score(const GaussianModel& model, const ScheduleSpec& spec, double t,
                 std::span<const double> x, std::span<double> out);

// alpha(t) = g(t)^2 / (a1^2 sigma0^2 + a2) - f(t): the exact linear drift rate
// of the reverse dynamics for Gaussian data.
double alpha_rate(const GaussianModel& model, const ScheduleSpec& spec, double t);

// gamma(t) = alpha(t) + f(t) = g(t)^2 / (a1^2 sigma0^2 + a2).
double gamma_rate(const GaussianModel& model, const ScheduleSpec& spec, double t);

// int_{lo}^{hi} alpha(u) du, by quadrature on alpha directly (differencing
// log-kernels cancels catastrophically for small windows).
double alpha_window_integral(const GaussianModel& model,
                             const ScheduleSpec& spec, double lo, double hi);

// Runs the exact variance recursion for K steps of size eta (K eta must equal
// the spec horizon). sigma_hat_sq[k] is the per-coordinate variance of y_k.
VarianceTrace variance_recursion(const GaussianModel& model,
                                 const ScheduleSpec& spec, long K, double eta);

// W2 between N(0, sigma_hat^2 I_d) and the data law: sqrt(d) |sigma_hat - sigma0|.
double w2_exact(const GaussianModel& model, double sigma_hat);

// First-order-in-eta coefficient of the variance recursion around its
// continuous-time limit, evaluated by cumulative quadrature over [0, T].
double compute_c0(const GaussianModel& model, const ScheduleSpec& spec);

// Variance of the continuous-time limit of the recursion (the eta^0 term):
// sigma0^2 (1 - exp(-2 int_0^T gamma)).
double recursion_limit_variance(const GaussianModel& model,
                                const ScheduleSpec& spec);

// Least-squares fit of theta in the linear score model s(x, t) = -theta x,
// against the Monte-Carlo denoising score-matching objective at fixed t.
// Converges to score_coefficient(model, spec, t) as sample_count grows.
double fit_linear_score(const GaussianModel& model, const ScheduleSpec& spec,
                        double t, long sample_count, std::uint64_t seed);

struct MinimalKResult {
  bool achieved = false;
  long k = 0;       // smallest K reaching the target, or the best K scanned
  double w2 = 0.0;  // W2 at that K
};

// Smallest K such that w2_exact(sigma_hat_K) <= eps, scanning K = 1, 2, ...
// with fixed stepsize eta and horizon T = K eta. Stops with a not-achieved
// report when the W2 curve has plateaued above eps; throws BudgetError past
// K = 10^7. If max_horizon > 0 the scan additionally stops at K eta >
// max_horizon.
MinimalKResult minimal_k_search(const GaussianModel& model,
                                const ScheduleSpec& spec, double eps,
                                double eta, double max_horizon = 0.0);

}  // namespace difflab
