#include "difflab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "difflab/errors.hpp"
#include "difflab/quadrature.hpp"

namespace difflab {

namespace {

constexpr int kGridPoints = 1024;
constexpr int kGoldenIters = 48;

// Grid scan plus golden-section refinement around the best grid cell.
// Integrands here are smooth (up to the single L-branch kink), so this is
// reliable and reports the argmin for audit.
template <class F>
Extremum minimize_on(F&& f, double lo, double hi) {
  Extremum best{std::numeric_limits<double>::infinity(), lo};
  int best_i = 0;
  for (int i = 0; i <= kGridPoints; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / kGridPoints;
    const double v = f(t);
    if (v < best.value) {
      best = {v, t};
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * static_cast<double>(std::max(0, best_i - 1)) / kGridPoints;
  double b = lo + (hi - lo) * static_cast<double>(std::min(kGridPoints, best_i + 1)) / kGridPoints;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < kGoldenIters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (fm < best.value) best = {fm, mid};
  return best;
}

template <class F>
Extremum maximize_on(F&& f, double lo, double hi) {
  Extremum m = minimize_on([&](double t) { return -f(t); }, lo, hi);
  return {-m.value, m.arg};
}

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

// Forward-time window covered by reverse step k.
Window step_window(const BoundContext& ctx, long k) {
  if (k < 1 || k > ctx.K) throw std::invalid_argument("step index out of range");
  const double T = ctx.spec.horizon_T;
  Window w;
  w.lo = (k == ctx.K) ? 0.0 : T - static_cast<double>(k) * ctx.eta;
  w.hi = T - static_cast<double>(k - 1) * ctx.eta;
  return w;
}

double drift_plus_scorelip(const BoundContext& ctx, double u) {
  const double g2 = ctx.spec.g_sq(u);
  return ctx.spec.f(u) + g2 * score_lipschitz(ctx, u);
}

}  // namespace

void BoundContext::validate() const {
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(m0 > 0.0 && m0 <= L0))
    throw std::invalid_argument("need 0 < m0 <= L0");
  if (!(M >= 0.0 && M1 >= 0.0))
    throw std::invalid_argument("M and M1 must be nonnegative");
  if (!(x0_l2 > 0.0)) throw std::invalid_argument("x0_l2 must be positive");
  const double T = spec.horizon_T;
  if (std::fabs(static_cast<double>(K) * eta - T) > 1e-12 * std::max(1.0, T))
    throw std::invalid_argument("K * eta must equal the schedule horizon");
}

BoundContext make_bound_context(const ScheduleSpec& spec, int d, long K,
                                double eta, double m0, double L0, double M,
                                double M1, double x_star_norm,
                                std::optional<double> x0_l2) {
  BoundContext ctx;
  ctx.spec = spec;
  ctx.d = d;
  ctx.K = K;
  ctx.eta = eta;
  ctx.m0 = m0;
  ctx.L0 = L0;
  ctx.M = M;
  ctx.M1 = M1;
  ctx.x_star_norm = x_star_norm;
  if (x0_l2.has_value()) {
    ctx.x0_l2 = *x0_l2;
    ctx.x0_l2_is_bound = false;
  } else {
    ctx.x0_l2 = x0_l2_default(m0, d, x_star_norm);
    ctx.x0_l2_is_bound = true;
  }
  ctx.validate();
  return ctx;
}

BoundContext bound_context_for_gaussian(const GaussianModel& model,
                                        const ScheduleSpec& spec, long K,
                                        double eta, double M, double M1) {
  return make_bound_context(spec, model.d, K, eta, model.implied_m0(),
                            model.implied_l0(), M, M1, 0.0,
                            model.x0_l2_exact());
}

double x0_l2_default(double m0, int d, double x_star_norm) {
  if (!(m0 > 0.0)) throw std::invalid_argument("m0 must be positive");
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  return std::sqrt(2.0 * static_cast<double>(d) / m0) + x_star_norm;
}

double prior_contraction_rate(const BoundContext& ctx, double t) {
  const KernelParams kp = kernel_params(ctx.spec, t);
  return ctx.m0 * ctx.spec.g_sq(t) / (kp.a1 * kp.a1 + ctx.m0 * kp.a2);
}

double prior_contraction_integral(const BoundContext& ctx, double t) {
  const Family fam = ctx.spec.family;
  if (is_ve(fam)) {
    // f == 0 makes c a perfect log-derivative of 1 + m0 a2.
    return std::log1p(ctx.m0 * kernel_params(ctx.spec, t).a2);
  }
  if (is_vp(fam)) {
    const double B = 2.0 * int_f(ctx.spec, 0.0, t);  // int beta
    return B + std::log(ctx.m0 + (1.0 - ctx.m0) * std::exp(-B));
  }
  return integrate_or_throw(
      [&](double s) { return prior_contraction_rate(ctx, s); }, 0.0, t, {},
      "contraction-rate quadrature did not converge");
}

double score_lipschitz(const BoundContext& ctx, double u) {
  const KernelParams kp = kernel_params(ctx.spec, u);
  const double smooth_branch = ctx.L0 / (kp.a1 * kp.a1);
  if (kp.a2 <= 0.0) return smooth_branch;
  return std::min(1.0 / kp.a2, smooth_branch);
}

double coupling_contraction_rate(const BoundContext& ctx, double t) {
  return 2.0 * (prior_contraction_rate(ctx, t) - ctx.spec.f(t));
}

double stepsize_numerator(const BoundContext& ctx, double t) {
  return prior_contraction_rate(ctx, t) - ctx.spec.f(t);
}

double vp_stepsize_numerator(const BoundContext& ctx, double t) {
  if (!is_vp(ctx.spec.family))
    throw std::invalid_argument("vp_stepsize_numerator requires a VP family");
  const double B = 2.0 * int_f(ctx.spec, 0.0, t);
  const double e = std::exp(-B);
  const double m0 = ctx.m0;
  return 0.5 * ctx.spec.beta(t) * (m0 - (1.0 - m0) * e) / (m0 + (1.0 - m0) * e);
}

double step_contraction_rate(const BoundContext& ctx, double u) {
  const double f = ctx.spec.f(u);
  const double g2 = ctx.spec.g_sq(u);
  const double L = score_lipschitz(ctx, u);
  return stepsize_numerator(ctx, u) - ctx.eta * (f * f + g2 * g2 * L * L);
}

Extremum initial_gap_sup(const BoundContext& ctx) {
  const double T = ctx.spec.horizon_T;
  const double fT = int_f(ctx.spec, 0.0, T);
  const double cT = prior_contraction_integral(ctx, T);
  // int_0^t m(T-s) ds telescopes into integrals of c and f over [T-t, T].
  auto value = [&](double t) {
    const double back = T - t;
    const double m_int = 2.0 * (cT - prior_contraction_integral(ctx, back)) -
                         2.0 * (fT - int_f(ctx.spec, 0.0, back));
    return std::exp(-0.5 * m_int - fT) * ctx.x0_l2;
  };
  return maximize_on(value, 0.0, T);
}

Extremum state_norm_sup(const BoundContext& ctx) {
  auto value = [&](double t) {
    const KernelParams kp = kernel_params(ctx.spec, t);
    return std::sqrt(kp.a1 * kp.a1 * ctx.x0_l2 * ctx.x0_l2 +
                     static_cast<double>(ctx.d) * kp.a2);
  };
  return maximize_on(value, 0.0, ctx.spec.horizon_T);
}

double step_overshoot(const BoundContext& ctx, long k, double c1, double c2) {
  const Window w = step_window(ctx, k);
  const double fgl = integrate_or_throw(
      [&](double u) { return drift_plus_scorelip(ctx, u); }, w.lo, w.hi, {},
      "overshoot quadrature did not converge");
  const double f_int = int_f(ctx.spec, w.lo, w.hi);
  const double g2_int = int_g2(ctx.spec, w.lo, w.hi);
  return c1 * fgl + c2 * f_int +
         std::sqrt(g2_int) * std::sqrt(static_cast<double>(ctx.d));
}

double per_step_factor(const BoundContext& ctx, long k) {
  const Window w = step_window(ctx, k);
  const double mu_int = integrate_or_throw(
      [&](double u) { return step_contraction_rate(ctx, u); }, w.lo, w.hi, {},
      "step-rate quadrature did not converge");
  const double g2_int = int_g2(ctx.spec, w.lo, w.hi);
  return 1.0 - mu_int + ctx.M1 * ctx.eta * g2_int;
}

StepsizeReport stepsize_admissible(const BoundContext& ctx) {
  ctx.validate();
  const double T = ctx.spec.horizon_T;
  StepsizeReport report;
  report.eta = ctx.eta;
  report.vp_agreement_max_diff = 0.0;

  if (is_vp(ctx.spec.family)) {
    double max_diff = 0.0;
    for (int i = 0; i <= 64; ++i) {
      const double t = T * static_cast<double>(i) / 64.0;
      max_diff = std::max(max_diff, std::fabs(stepsize_numerator(ctx, t) -
                                              vp_stepsize_numerator(ctx, t)));
    }
    report.vp_agreement_max_diff = max_diff;
    if (!(max_diff <= 1e-8 * std::max(1.0, ctx.spec.beta(T))))
      throw NumericError("VP stepsize closed form disagrees with the general formula",
                         max_diff);
  }

  // Both condition right-hand sides are infima over t of expressions built
  // from the shared numerator N = c - f. N may touch zero where g vanishes
  // (the condition limits are +inf there); only N < 0 somewhere makes a
  // condition unsatisfiable.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto ratio1 = [&](double t) {
    const double num = stepsize_numerator(ctx, t);
    const double f = ctx.spec.f(t);
    const double g2 = ctx.spec.g_sq(t);
    const double L = score_lipschitz(ctx, t);
    const double den = f * f + g2 * g2 * L * L + ctx.M1 * g2;
    if (den <= 0.0) return num >= 0.0 ? kInf : -kInf;
    return num / den;
  };
  auto ratio2 = [&](double t) {
    const double num = stepsize_numerator(ctx, t);
    if (num == 0.0) return kInf;
    return 1.0 / num;  // negative when the numerator is, which flags it
  };
  const Extremum cond1 = minimize_on(ratio1, 0.0, T);
  const Extremum cond2 = minimize_on(ratio2, 0.0, T);

  report.rhs_condition1 = cond1.value;
  report.argmin_condition1 = cond1.arg;
  report.rhs_condition2 = cond2.value;
  report.argmax_numerator = cond2.arg;
  if (!(cond1.value > 0.0) || !(cond2.value > 0.0)) {
    report.positive = false;
    report.admissible = false;
    report.eta_max = 0.0;
    const bool first = !(cond1.value > 0.0);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "right-hand side of stepsize condition %d is nonpositive at "
                  "t = %.6g (value %.6g); no stepsize is admissible",
                  first ? 1 : 2, first ? cond1.arg : cond2.arg,
                  first ? cond1.value : cond2.value);
    report.violation = buf;
    return report;
  }
  report.positive = true;
  report.eta_max = std::min(report.rhs_condition1, report.rhs_condition2);
  report.binding_condition = report.rhs_condition1 <= report.rhs_condition2
                                 ? "condition 1 (rate over squared-drift ratio)"
                                 : "condition 2 (reciprocal of the peak rate)";
  report.admissible = ctx.eta <= report.eta_max;
  return report;
}

BoundReport w2_upper_bound(const BoundContext& ctx) {
  ctx.validate();
  BoundReport report;
  report.stepsize = stepsize_admissible(ctx);
  if (!report.stepsize.admissible)
    throw AdmissibilityError(
        report.stepsize.positive
            ? "stepsize exceeds the admissible cap eta_max = " +
                  std::to_string(report.stepsize.eta_max)
            : report.stepsize.violation);

  const double T = ctx.spec.horizon_T;
  report.c_integral = prior_contraction_integral(ctx, T);
  report.prior_term = std::exp(-report.c_integral) * ctx.x0_l2;
  report.c1 = initial_gap_sup(ctx).value;
  report.c2 = state_norm_sup(ctx).value;
  report.x0_l2_is_bound = ctx.x0_l2_is_bound;

  const std::size_t K = static_cast<std::size_t>(ctx.K);
  report.factors.resize(K);
  report.h_values.resize(K);
  report.brackets.resize(K);
  report.mu_integrals.resize(K);
  report.g2_integrals.resize(K);

  // S = sum_k (prod_{j>k} factor_j) bracket_k accumulated as
  // S <- S * factor_k + bracket_k for k = 1..K; no product is materialized,
  // so large K cannot underflow it.
  double sum = 0.0;
  for (long k = 1; k <= ctx.K; ++k) {
    const Window w = step_window(ctx, k);
    const std::size_t i = static_cast<std::size_t>(k - 1);
    const double mu_int = integrate_or_throw(
        [&](double u) { return step_contraction_rate(ctx, u); }, w.lo, w.hi, {},
        "step-rate quadrature did not converge");
    const double g2_int = int_g2(ctx.spec, w.lo, w.hi);
    const double factor = 1.0 - mu_int + ctx.M1 * ctx.eta * g2_int;
    if (!(factor > 0.0 && factor < 1.0))
      throw AdmissibilityError("per-step factor " + std::to_string(factor) +
                               " at step " + std::to_string(k) +
                               " is outside (0, 1)");
    const double fgl_sq = integrate_or_throw(
        [&](double u) {
          const double v = drift_plus_scorelip(ctx, u);
          return v * v;
        },
        w.lo, w.hi, {}, "squared-drift quadrature did not converge");
    const double h = step_overshoot(ctx, k, report.c1, report.c2);
    const double bracket =
        ctx.M1 * ctx.eta * (1.0 + ctx.x0_l2 + report.c2) * g2_int +
        ctx.M * g2_int + std::sqrt(ctx.eta) * h * std::sqrt(fgl_sq);
    report.factors[i] = factor;
    report.h_values[i] = h;
    report.brackets[i] = bracket;
    report.mu_integrals[i] = mu_int;
    report.g2_integrals[i] = g2_int;
    sum = sum * factor + bracket;
  }
  report.sum_term = sum;
  report.total = report.prior_term + report.sum_term;
  return report;
}

double prior_gap(const BoundContext& ctx) {
  return std::exp(-int_f(ctx.spec, 0.0, ctx.spec.horizon_T)) * ctx.x0_l2;
}

}  // namespace difflab
