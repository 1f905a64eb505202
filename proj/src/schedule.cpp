#include "difflab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace difflab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_time_range(const ScheduleSpec& spec, double t) {
  if (!(t >= 0.0 && t <= spec.horizon_T))
    throw std::invalid_argument("time outside [0, horizon_T]");
}

void check_interval(const ScheduleSpec& spec, double t0, double t1) {
  check_time_range(spec, t0);
  check_time_range(spec, t1);
  if (t0 > t1) throw std::invalid_argument("inverted integration interval");
}

// Antiderivative B(t) = int_0^t beta(s) ds for the VP families.
double beta_antiderivative(const ScheduleSpec& s, double t) {
  switch (s.family) {
    case Family::VpConst:
      return s.beta_min * t;
    case Family::VpLinear:
      return s.beta_min * t + 0.5 * (s.beta_max - s.beta_min) * t * t;
    case Family::VpPoly: {
      const double b = std::pow(s.beta_min, 1.0 / s.rho);
      const double a = std::pow(s.beta_max, 1.0 / s.rho) - b;
      return (std::pow(b + a * t, s.rho + 1.0) - std::pow(b, s.rho + 1.0)) /
             (a * (s.rho + 1.0));
    }
    case Family::VpExp: {
      const double logr = std::log(s.beta_max / s.beta_min);
      return s.beta_min * std::expm1(logr * t) / logr;
    }
    default:
      throw std::logic_error("beta_antiderivative: not a VP family");
  }
}

}  // namespace

const char* family_name(Family family) {
  switch (family) {
    case Family::VeExp: return "ve_exp";
    case Family::VeConst: return "ve_const";
    case Family::VeSqrt2At: return "ve_sqrt2at";
    case Family::VePoly: return "ve_poly";
    case Family::VpConst: return "vp_const";
    case Family::VpLinear: return "vp_linear";
    case Family::VpPoly: return "vp_poly";
    case Family::VpExp: return "vp_exp";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "ve_exp") return Family::VeExp;
  if (name == "ve_const") return Family::VeConst;
  if (name == "ve_sqrt2at") return Family::VeSqrt2At;
  if (name == "ve_poly") return Family::VePoly;
  if (name == "vp_const") return Family::VpConst;
  if (name == "vp_linear") return Family::VpLinear;
  if (name == "vp_poly") return Family::VpPoly;
  if (name == "vp_exp") return Family::VpExp;
  if (name == "custom") return Family::Custom;
  throw std::invalid_argument("unknown schedule family: " + name);
}

bool is_vp(Family family) {
  return family == Family::VpConst || family == Family::VpLinear ||
         family == Family::VpPoly || family == Family::VpExp;
}

bool is_ve(Family family) {
  return family == Family::VeExp || family == Family::VeConst ||
         family == Family::VeSqrt2At || family == Family::VePoly;
}

double ScheduleSpec::beta(double t) const {
  switch (family) {
    case Family::VpConst:
      return beta_min;
    case Family::VpLinear:
      return beta_min + (beta_max - beta_min) * t;
    case Family::VpPoly: {
      const double b0 = std::pow(beta_min, 1.0 / rho);
      const double a0 = std::pow(beta_max, 1.0 / rho) - b0;
      return std::pow(b0 + a0 * t, rho);
    }
    case Family::VpExp:
      return beta_min * std::exp(std::log(beta_max / beta_min) * t);
    default:
      throw std::logic_error("beta(): not a VP family");
  }
}

double ScheduleSpec::f(double t) const {
  switch (family) {
    case Family::VeExp:
    case Family::VeConst:
    case Family::VeSqrt2At:
    case Family::VePoly:
      return 0.0;
    case Family::Custom:
      return custom_f(t);
    default:
      return 0.5 * beta(t);
  }
}

double ScheduleSpec::g(double t) const {
  switch (family) {
    case Family::VeExp:
      return a * std::exp(b * t);
    case Family::VeConst:
      return a;
    case Family::VeSqrt2At:
      return std::sqrt(2.0 * a * t);
    case Family::VePoly:
      return std::pow(b + a * t, c);
    case Family::Custom:
      return custom_g(t);
    default:
      return std::sqrt(beta(t));
  }
}

ScheduleSpec ScheduleSpec::with_horizon(double T) const {
  require(T > 0.0, "horizon_T must be positive");
  ScheduleSpec out = *this;
  out.horizon_T = T;
  return out;
}

ScheduleSpec ScheduleSpec::ve_exp(double a, double b, double T) {
  require(a > 0.0 && b > 0.0 && T > 0.0, "ve_exp requires a > 0, b > 0, T > 0");
  ScheduleSpec s;
  s.family = Family::VeExp;
  s.a = a;
  s.b = b;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::ve_const(double a, double T) {
  require(a > 0.0 && T > 0.0, "ve_const requires a > 0, T > 0");
  ScheduleSpec s;
  s.family = Family::VeConst;
  s.a = a;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::ve_sqrt2at(double a, double T) {
  require(a > 0.0 && T > 0.0, "ve_sqrt2at requires a > 0, T > 0");
  ScheduleSpec s;
  s.family = Family::VeSqrt2At;
  s.a = a;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::ve_poly(double a, double b, double c, double T) {
  require(a > 0.0 && b > 0.0 && c > 0.0 && T > 0.0,
          "ve_poly requires a > 0, b > 0, c > 0, T > 0");
  ScheduleSpec s;
  s.family = Family::VePoly;
  s.a = a;
  s.b = b;
  s.c = c;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::vp_const(double beta_const, double T) {
  require(beta_const > 0.0 && T > 0.0, "vp_const requires beta_const > 0, T > 0");
  ScheduleSpec s;
  s.family = Family::VpConst;
  s.beta_min = beta_const;
  s.beta_max = beta_const;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::vp_linear(double beta_min, double beta_max, double T) {
  require(beta_min > 0.0 && beta_max > beta_min && T > 0.0,
          "vp_linear requires 0 < beta_min < beta_max, T > 0");
  ScheduleSpec s;
  s.family = Family::VpLinear;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::vp_poly(double beta_min, double beta_max, double rho,
                                   double T) {
  require(beta_min > 0.0 && beta_max > beta_min && T > 0.0,
          "vp_poly requires 0 < beta_min < beta_max, T > 0");
  require(rho >= 1.0, "vp_poly requires rho >= 1");
  ScheduleSpec s;
  s.family = Family::VpPoly;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.rho = rho;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::vp_exp(double beta_min, double beta_max, double T) {
  require(beta_min > 0.0 && beta_max > beta_min && T > 0.0,
          "vp_exp requires 0 < beta_min < beta_max, T > 0");
  ScheduleSpec s;
  s.family = Family::VpExp;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.horizon_T = T;
  return s;
}

ScheduleSpec ScheduleSpec::custom(std::function<double(double)> f,
                                  std::function<double(double)> g, double T) {
  require(static_cast<bool>(f) && static_cast<bool>(g),
          "custom schedule requires both f and g callables");
  require(T > 0.0, "horizon_T must be positive");
  ScheduleSpec s;
  s.family = Family::Custom;
  s.custom_f = std::move(f);
  s.custom_g = std::move(g);
  s.horizon_T = T;
  return s;
}

double int_f(const ScheduleSpec& spec, double t0, double t1) {
  check_interval(spec, t0, t1);
  switch (spec.family) {
    case Family::VeExp:
    case Family::VeConst:
    case Family::VeSqrt2At:
    case Family::VePoly:
      return 0.0;
    case Family::Custom:
      return integrate_or_throw([&](double s) { return spec.custom_f(s); }, t0,
                                t1, {}, "int_f quadrature did not converge");
    default:
      return 0.5 * (beta_antiderivative(spec, t1) - beta_antiderivative(spec, t0));
  }
}

double int_g2(const ScheduleSpec& spec, double t0, double t1) {
  check_interval(spec, t0, t1);
  switch (spec.family) {
    case Family::VeExp:
      return spec.a * spec.a * (std::exp(2.0 * spec.b * t1) - std::exp(2.0 * spec.b * t0)) /
             (2.0 * spec.b);
    case Family::VeConst:
      return spec.a * spec.a * (t1 - t0);
    case Family::VeSqrt2At:
      return spec.a * (t1 * t1 - t0 * t0);
    case Family::VePoly: {
      const double p = 2.0 * spec.c + 1.0;
      return (std::pow(spec.b + spec.a * t1, p) - std::pow(spec.b + spec.a * t0, p)) /
             (spec.a * p);
    }
    case Family::Custom:
      return integrate_or_throw(
          [&](double s) { double v = spec.custom_g(s); return v * v; }, t0, t1,
          {}, "int_g2 quadrature did not converge");
    default:
      return beta_antiderivative(spec, t1) - beta_antiderivative(spec, t0);
  }
}

KernelParams kernel_params(const ScheduleSpec& spec, double t) {
  check_time_range(spec, t);
  KernelParams kp;
  if (is_ve(spec.family)) {
    kp.a1 = 1.0;
    kp.a2 = int_g2(spec, 0.0, t);
    return kp;
  }
  if (is_vp(spec.family)) {
    const double B = beta_antiderivative(spec, t);
    kp.a1 = std::exp(-0.5 * B);
    kp.a2 = -std::expm1(-B);  // 1 - a1^2, without cancellation
    return kp;
  }
  return kernel_params_by_quadrature(spec, t);
}

KernelParams kernel_params_by_quadrature(const ScheduleSpec& spec, double t,
                                         QuadratureOptions opt) {
  check_time_range(spec, t);
  auto F = [&](double lo, double hi) {
    return integrate_or_throw([&](double s) { return spec.f(s); }, lo, hi, opt,
                              "kernel quadrature (drift) did not converge");
  };
  KernelParams kp;
  const double Ft = F(0.0, t);
  kp.a1 = std::exp(-Ft);
  kp.a2 = integrate_or_throw(
      [&](double s) {
        return std::exp(-2.0 * F(s, t)) * spec.g_sq(s);
      },
      0.0, t, opt, "kernel quadrature (variance) did not converge");
  return kp;
}

GaussianMarginal prior_distribution(const ScheduleSpec& spec) {
  GaussianMarginal m;
  m.mean = 0.0;
  m.variance = kernel_params(spec, spec.horizon_T).a2;
  return m;
}

}  // namespace difflab
