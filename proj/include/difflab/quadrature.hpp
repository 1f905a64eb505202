#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "difflab/errors.hpp"

namespace difflab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // accumulated local Richardson estimates
  bool converged = true;
  long evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 60;
};

namespace detail {

template <class F>
void adaptive_simpson_rec(F& f, double a, double m, double b, double fa,
                          double fm, double fb, double whole, double abs_tol,
                          double rel_tol, int depth, QuadratureResult& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  out.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double tol = std::max(abs_tol, rel_tol * std::fabs(left + right));
  // NaN deltas (non-finite integrand values) must not pass as converged
  if (std::fabs(delta) <= 15.0 * tol || depth <= 0) {
    out.value += left + right + delta / 15.0;
    out.error_estimate += std::isfinite(delta)
                              ? std::fabs(delta) / 15.0
                              : std::numeric_limits<double>::infinity();
    if (depth <= 0 && !(std::fabs(delta) <= 15.0 * tol)) out.converged = false;
    return;
  }
  adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol,
                       depth - 1, out);
  adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol,
                       depth - 1, out);
}

}  // namespace detail

// Adaptive Simpson on [a, b]. Smooth integrands converge in a handful of
// levels; the recursion depth cap only trips on genuinely singular inputs.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    QuadratureOptions opt = {}) {
  QuadratureResult out;
  if (a == b) return out;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, opt.abs_tol,
                               opt.rel_tol, opt.max_depth, out);
  return out;
}

// Same, but promotes non-convergence to a NumericError.
template <class F>
double integrate_or_throw(F&& f, double a, double b, QuadratureOptions opt = {},
                          const char* what = "quadrature did not converge") {
  QuadratureResult r = integrate_adaptive(std::forward<F>(f), a, b, opt);
  if (!r.converged) throw NumericError(what, r.error_estimate);
  return r.value;
}

}  // namespace difflab
