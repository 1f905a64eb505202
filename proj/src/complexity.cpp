#include "difflab/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace difflab {

namespace {

const char* kSuppressedNote =
    "multiplicative order constants suppressed; caps are the explicit "
    "closed-form pieces of the derivation";

void check_query(const ComplexityQuery& q) {
  if (!(q.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (q.d < 1) throw std::invalid_argument("dimension must be at least 1");
}

double log_sqrtd_over_eps(const ComplexityQuery& q) {
  const double L = std::log(std::sqrt(static_cast<double>(q.d)) / q.eps);
  if (!(L > 0.0))
    throw std::invalid_argument(
        "degenerate accuracy target: log(sqrt(d)/eps) <= 0");
  return L;
}

double log_d_over_eps(const ComplexityQuery& q) {
  return std::log(static_cast<double>(q.d) / q.eps);
}

long ceil_steps(double T, double eta) {
  const double k = std::ceil(T / eta - 1e-9);
  if (!(k >= 1.0 && k < 9.2e18))
    throw std::invalid_argument("prescribed step count is not representable");
  return static_cast<long>(k);
}

std::string fmt_params(const char* fmt, double p1, double p2 = 0.0,
                       double p3 = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, p1, p2, p3);
  return buf;
}

Prescription finish(Family family, std::string params, double T, double eta,
                    double M, std::string label, double order_value) {
  if (!(T > 0.0))
    throw std::invalid_argument("prescribed horizon is nonpositive");
  if (!(eta > 0.0 && M > 0.0))
    throw std::invalid_argument("prescribed caps are nonpositive");
  Prescription p;
  p.family = family;
  p.params = std::move(params);
  p.T_val = T;
  p.eta_max = eta;
  p.M_max = M;
  p.K_min = ceil_steps(T, eta);
  p.order_label = std::move(label);
  p.order_value = order_value;
  p.note = kSuppressedNote;
  return p;
}

Prescription prescribe_vp_poly_like(Family family, const std::string& params,
                                    double a, double b, double rho,
                                    const ComplexityQuery& q) {
  const double L = log_sqrtd_over_eps(q);
  const double T =
      std::pow(a * (rho + 1.0), 1.0 / (rho + 1.0)) / a * std::pow(L, 1.0 / (rho + 1.0)) -
      b / a;
  const double dd = static_cast<double>(q.d);
  const double eta = q.eps * q.eps / dd;
  const double Ld = log_d_over_eps(q);
  const double order = dd * std::pow(Ld, 1.0 / (rho + 1.0)) / (q.eps * q.eps);
  std::string label =
      family == Family::VpLinear
          ? std::string("O(d*sqrt(log(d/eps))/eps^2)")
          : fmt_params("O(d*log(d/eps)^(1/%.6g)/eps^2)", rho + 1.0);
  return finish(family, params, T, eta, q.eps, std::move(label), order);
}

}  // namespace

double lower_bound_gaussian(const ComplexityQuery& query) {
  check_query(query);
  return std::sqrt(static_cast<double>(query.d)) / query.eps;
}

Prescription prescribe_const_coeff(double alpha, double sigma,
                                   const ComplexityQuery& q) {
  check_query(q);
  if (!(alpha > 0.0 && sigma > 0.0))
    throw std::invalid_argument("const-coefficient SDE needs alpha > 0, sigma > 0");
  const double sigma2 = sigma * sigma;
  if (!(q.m0 >= 2.0 * alpha / sigma2))
    throw std::invalid_argument(
        "const-coefficient prescription requires m0 >= 2 alpha / sigma^2");
  const double dd = static_cast<double>(q.d);
  const double x0_bound = std::sqrt(2.0 * dd / q.m0) + q.x_star_norm;
  const double c1_tilde = x0_bound * (4.0 * alpha + sigma2 * q.L0) +
                          alpha * std::sqrt(dd * sigma2 / (2.0 * alpha)) +
                          sigma * std::sqrt(dd);
  const double drift_cap = 3.0 * alpha + sigma2 * q.L0;
  double eta = std::min(
      {1.0,
       alpha / (2.0 * alpha * alpha +
                2.0 * (2.0 * alpha + sigma2 * q.L0) * (2.0 * alpha + sigma2 * q.L0)),
       q.eps * q.eps * alpha * alpha /
           (64.0 * c1_tilde * c1_tilde * drift_cap * drift_cap)});
  if (q.M1 > 0.0) {
    eta = std::min(eta, alpha / (8.0 * q.M1 *
                                 (1.0 + 2.0 * x0_bound +
                                  sigma * std::sqrt(dd) / std::sqrt(2.0 * alpha)) *
                                 sigma2));
  }
  const double M = q.eps * alpha / (8.0 * sigma2);
  const double T =
      1.0 / (2.0 * alpha) *
      std::log((4.0 * x0_bound / q.eps - 1.0) * 2.0 * alpha / (q.m0 * sigma2) + 1.0);
  const double order =
      dd * log_d_over_eps(q) / (q.eps * q.eps);
  return finish(Family::VpConst, fmt_params("alpha=%.6g,sigma=%.6g", alpha, sigma),
                T, eta, M, "O(d*log(d/eps)/eps^2)", order);
}

Prescription prescribe(const ScheduleSpec& family, const ComplexityQuery& q) {
  check_query(q);
  const double dd = static_cast<double>(q.d);
  const double eps = q.eps;
  switch (family.family) {
    case Family::VeExp: {
      const double L = log_sqrtd_over_eps(q);
      if (!(eps < 1.0))
        throw std::invalid_argument("exponential-g prescription requires eps < 1");
      const double T = L / (2.0 * family.b);
      const double eta = eps * eps / dd;
      const double M = eps / std::log(1.0 / eps);
      const double order = dd * log_d_over_eps(q) / (eps * eps);
      return finish(Family::VeExp, fmt_params("a=%.6g,b=%.6g", family.a, family.b),
                    T, eta, M, "O(d*log(d/eps)/eps^2)", order);
    }
    case Family::VeConst: {
      const double Ld = log_d_over_eps(q);
      if (!(Ld > 1.0))
        throw std::invalid_argument(
            "constant-g prescription is outside its asymptotic regime (needs d/eps > e)");
      const double T = std::sqrt(dd) / eps;
      const double eta = eps * eps / (dd * Ld);
      const double M = eps / std::sqrt(Ld);
      const double order = std::pow(dd, 1.5) * Ld / (eps * eps * eps);
      return finish(Family::VeConst, fmt_params("a=%.6g", family.a), T, eta, M,
                    "O(d^(3/2)*log(d/eps)/eps^3)", order);
    }
    case Family::VeSqrt2At: {
      const double T = std::pow(dd, 0.25) / std::sqrt(eps);
      const double eta = eps * eps / dd;
      const double M = std::pow(eps, 1.5);
      const double order = std::pow(dd, 1.25) / std::pow(eps, 2.5);
      return finish(Family::VeSqrt2At, fmt_params("a=%.6g", family.a), T, eta, M,
                    "O(d^(5/4)/eps^(5/2))", order);
    }
    case Family::VePoly: {
      const double c = family.c;
      const double p = 2.0 * c + 1.0;
      const double T = std::pow(dd, 1.0 / (2.0 * p)) / std::pow(eps, 1.0 / p);
      const double eta = eps * eps / dd;
      const double M = std::pow(eps, 1.0 + 2.0 * c / p);
      const double order =
          std::pow(dd, 1.0 / (2.0 * p) + 1.0) / std::pow(eps, 1.0 / p + 2.0);
      return finish(Family::VePoly,
                    fmt_params("a=%.6g,b=%.6g,c=%.6g", family.a, family.b, c), T,
                    eta, M,
                    fmt_params("O(d^(1/(2*%.6g)+1)/eps^(1/%.6g+2))", p, p), order);
    }
    case Family::VpConst:
      return prescribe_const_coeff(0.5 * family.beta_min,
                                   std::sqrt(family.beta_min), q);
    case Family::VpLinear: {
      const double a = family.beta_max - family.beta_min;
      const double b = family.beta_min;
      return prescribe_vp_poly_like(
          Family::VpLinear,
          fmt_params("beta_min=%.6g,beta_max=%.6g", family.beta_min, family.beta_max),
          a, b, 1.0, q);
    }
    case Family::VpPoly: {
      const double b = std::pow(family.beta_min, 1.0 / family.rho);
      const double a = std::pow(family.beta_max, 1.0 / family.rho) - b;
      return prescribe_vp_poly_like(
          Family::VpPoly,
          fmt_params("beta_min=%.6g,beta_max=%.6g,rho=%.6g", family.beta_min,
                     family.beta_max, family.rho),
          a, b, family.rho, q);
    }
    case Family::VpExp: {
      const double L = log_sqrtd_over_eps(q);
      const double a = family.beta_min;
      const double b = std::log(family.beta_max / family.beta_min);
      if (!(b / a * L > 1.0))
        throw std::invalid_argument(
            "exponential-beta prescription gives a nonpositive horizon here");
      const double T = std::log(b / a * L) / b;
      const double eta = eps * eps / dd;
      const double order =
          dd * std::log(std::max(std::exp(1.0), log_d_over_eps(q))) / (eps * eps);
      return finish(Family::VpExp,
                    fmt_params("beta_min=%.6g,beta_max=%.6g", family.beta_min,
                               family.beta_max),
                    T, eta, eps, "O(d*log(log(d/eps))/eps^2)", order);
    }
    case Family::Custom:
      throw std::invalid_argument("no closed-form prescription for custom schedules");
  }
  throw std::invalid_argument("unknown family");
}

Prescription prescribe_vp_general(const ScheduleSpec& family,
                                  const ComplexityQuery& q,
                                  const VpGrowthConstants& growth) {
  check_query(q);
  if (!is_vp(family.family))
    throw std::invalid_argument("the general VP prescription needs a VP family");
  if (!(growth.c1 > 0.0 && growth.c2 > 0.0 && growth.c3 > 0.0))
    throw std::invalid_argument("growth constants must be positive");
  if (!(q.eps < 1.0))
    throw std::invalid_argument("the general VP prescription requires eps < 1");
  const double L = log_sqrtd_over_eps(q);

  // Horizon solves int_0^T beta = L; expand then bisect on the closed form.
  auto beta_integral = [&](double T) {
    if (T <= 0.0) return 0.0;
    return 2.0 * int_f(family.with_horizon(T), 0.0, T);
  };
  double hi = 1.0;
  while (beta_integral(hi) < L) {
    hi *= 2.0;
    if (hi > 1e12)
      throw std::invalid_argument("beta integral never reaches the required level");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (beta_integral(mid) < L ? lo : hi) = mid;
  }
  const double T = 0.5 * (lo + hi);

  // Growth condition beta(t) <= c1 (int beta)^{c3} + c2, checked on a grid.
  const ScheduleSpec sched = family.with_horizon(T);
  for (int i = 0; i <= 512; ++i) {
    const double t = T * static_cast<double>(i) / 512.0;
    const double lhs = sched.beta(t);
    const double rhs =
        growth.c1 * std::pow(beta_integral(t), growth.c3) + growth.c2;
    if (lhs > rhs * (1.0 + 1e-12))
      throw std::invalid_argument(
          "growth condition beta <= c1 (int beta)^c3 + c2 fails at t = " +
          std::to_string(t));
  }

  const double dd = static_cast<double>(q.d);
  const double M = q.eps / std::pow(L, growth.c3);
  const double eta =
      q.eps * q.eps / (dd * std::pow(std::log(1.0 / q.eps), 3.0 / growth.c3));
  const double Ld = log_d_over_eps(q);
  const double order =
      dd * std::pow(Ld, 3.0 * growth.c3 + 1.0) / (q.eps * q.eps);
  Prescription p = finish(
      family.family,
      fmt_params("c1=%.6g,c2=%.6g,c3=%.6g", growth.c1, growth.c2, growth.c3), T,
      eta, M, fmt_params("O(d*log(d/eps)^(3*%.6g+1)/eps^2)", growth.c3), order);
  return p;
}

OrderingReport ordering_report(const std::vector<ScheduleSpec>& families,
                               const ComplexityQuery& query) {
  OrderingReport report;
  report.ranked.reserve(families.size());
  double k_ve_const = 0.0, k_ve_exp = 0.0;
  for (const ScheduleSpec& f : families) {
    Prescription p = prescribe(f, query);
    if (p.family == Family::VeConst) k_ve_const = static_cast<double>(p.K_min);
    if (p.family == Family::VeExp) k_ve_exp = static_cast<double>(p.K_min);
    report.ranked.push_back(std::move(p));
  }
  std::sort(report.ranked.begin(), report.ranked.end(),
            [](const Prescription& a, const Prescription& b) {
              return a.K_min < b.K_min;
            });
  if (k_ve_const > 0.0 && k_ve_exp > 0.0) {
    report.ve_const_over_ve_exp = k_ve_const / k_ve_exp;
    report.phase_transition_flagged = report.ve_const_over_ve_exp > 10.0;
  }
  return report;
}

}  // namespace difflab
