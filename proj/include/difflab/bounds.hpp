#pragma once

#include <optional>
#include <string>
#include <vector>

#include "difflab/gaussian_oracle.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

// Data-regularity and score-error constants plus the run geometry; the input
// to every convergence-bound quantity. m0/L0 are the strong-convexity and
// smoothness constants of -log p0, M the score-matching error level, M1 the
// time-Lipschitz constant of the true score.
struct BoundContext {
  ScheduleSpec spec;
  int d = 1;
  long K = 1;
  double eta = 1.0;
  double m0 = 1.0;
  double L0 = 1.0;
  double M = 0.0;
  double M1 = 0.0;
  double x_star_norm = 0.0;
  double x0_l2 = 0.0;
  // True when x0_l2 was filled from the sqrt(2 d / m0) + |x*| upper bound
  // rather than supplied exactly.
  bool x0_l2_is_bound = false;

  void validate() const;
};

BoundContext make_bound_context(const ScheduleSpec& spec, int d, long K,
                                double eta, double m0, double L0, double M,
                                double M1, double x_star_norm,
                                std::optional<double> x0_l2 = std::nullopt);

// Context for Gaussian data: m0 = L0 = 1/sigma0^2, exact |x0|_{L2}.
BoundContext bound_context_for_gaussian(const GaussianModel& model,
                                        const ScheduleSpec& spec, long K,
                                        double eta, double M = 0.0,
                                        double M1 = 0.0);

// Fallback L2 norm of x0 when only the regularity constants are known.
double x0_l2_default(double m0, int d, double x_star_norm);

// c(t): contraction rate of the continuous reverse flow toward the data law.
double prior_contraction_rate(const BoundContext& ctx, double t);

// int_0^t c(s) ds, closed form for built-in families.
double prior_contraction_integral(const BoundContext& ctx, double t);

// L(u): Lipschitz constant of the score of the forward marginal at time u,
// min( 1/a2(u), L0/a1(u)^2 ). At u = 0 the first branch is +inf and the min
// resolves to L0.
double score_lipschitz(const BoundContext& ctx, double u);

// m(t) = 2 (c(t) - f(t)): contraction rate of the squared coupling distance.
double coupling_contraction_rate(const BoundContext& ctx, double t);

// Numerator shared by both stepsize admissibility conditions,
// g^2 / ((1/m0) a1^2 + a2) - f = c - f = m/2.
double stepsize_numerator(const BoundContext& ctx, double t);

// The same quantity through the VP closed form
// (beta/2) (m0 - (1-m0) e^{-B}) / (m0 + (1-m0) e^{-B}); VP families only.
double vp_stepsize_numerator(const BoundContext& ctx, double t);

// mu(u) = c(u) - f(u) - eta (f(u)^2 + g(u)^4 L(u)^2): per-step contraction
// rate of the discretization and score-matching errors.
double step_contraction_rate(const BoundContext& ctx, double u);

struct Extremum {
  double value = 0.0;
  double arg = 0.0;  // where on [0, T] the extremum was located
};

// c1(T): bound on sup_t |z_t - x~_t|_{L2} (supremum over a 1024-point grid
// with golden-section refinement, as are all extrema below).
Extremum initial_gap_sup(const BoundContext& ctx);

// c2(T): sup_t |x_t|_{L2}.
Extremum state_norm_sup(const BoundContext& ctx);

// h_{k,eta}: bound on the within-step excursion of the reverse flow. c1/c2
// are passed in so per-step evaluation does not redo the suprema.
double step_overshoot(const BoundContext& ctx, long k, double c1, double c2);

// 1 - int_W mu + M1 eta int_W g^2 over the k-th reverse window: the factor
// that contracts accumulated error across steps. Must lie in (0, 1) for
// admissible stepsizes.
double per_step_factor(const BoundContext& ctx, long k);

struct StepsizeReport {
  bool admissible = false;  // for ctx.eta
  bool positive = false;    // both condition right-hand sides are positive
  double eta = 0.0;
  double eta_max = 0.0;          // min of the two condition caps
  double rhs_condition1 = 0.0;   // min_t numerator / (f^2 + g^4 L^2 + M1 g^2)
  double rhs_condition2 = 0.0;   // 1 / max_t numerator
  double argmin_condition1 = 0.0;
  double argmax_numerator = 0.0;
  std::string binding_condition;
  std::string violation;  // set when positive == false
  // VP families: largest |general - closed form| over a check grid.
  double vp_agreement_max_diff = 0.0;
};

// Checks both stepsize admissibility conditions and returns the
// largest admissible stepsize; for VP families also cross-checks the general
// numerator against its closed form.
StepsizeReport stepsize_admissible(const BoundContext& ctx);

struct BoundReport {
  double total = 0.0;
  double prior_term = 0.0;  // e^{-int c} |x0|_{L2}
  double sum_term = 0.0;
  double c_integral = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  bool x0_l2_is_bound = false;
  std::vector<double> factors;        // per-step contraction factors
  std::vector<double> h_values;       // per-step overshoot bounds
  std::vector<double> brackets;       // per-step error injections
  std::vector<double> mu_integrals;
  std::vector<double> g2_integrals;
  StepsizeReport stepsize;
};

// Full evaluation of the W2 upper bound: the prior-contraction term plus the
// K-fold product-sum of per-step factors and error brackets. Throws
// AdmissibilityError when the stepsize fails the admissibility checks or any
// per-step factor leaves (0, 1).
BoundReport w2_upper_bound(const BoundContext& ctx);

// W2(p_T, prior) <= e^{-int_0^T f} |x0|_{L2} = a1(T) |x0|_{L2}.
double prior_gap(const BoundContext& ctx);

}  // namespace difflab
