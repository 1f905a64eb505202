#pragma once

#include <functional>
#include <string>

#include "difflab/quadrature.hpp"

namespace difflab {

// Forward SDE coefficient families, dx = -f(t) x dt + g(t) dB.
// VE families have f == 0; VP families have f = beta/2, g = sqrt(beta).
enum class Family {
  VeExp,     // g(t) = a e^{bt}
  VeConst,   // g(t) = a
  VeSqrt2At, // g(t) = sqrt(2 a t)
  VePoly,    // g(t) = (b + a t)^c
  VpConst,   // beta(t) = beta_const
  VpLinear,  // beta(t) = beta_min + (beta_max - beta_min) t
  VpPoly,    // beta(t) = (b + a t)^rho, b = beta_min^{1/rho}, a = beta_max^{1/rho} - b
  VpExp,     // beta(t) = beta_min (beta_max/beta_min)^t
  Custom,    // user-supplied f, g; integrals fall back to quadrature
};

const char* family_name(Family family);
Family family_from_name(const std::string& name);
bool is_vp(Family family);
bool is_ve(Family family);

// Gaussian transition-kernel coefficients of the forward process at time t:
// x_t | x_0  ~  N(a1 x_0, a2 I).
struct KernelParams {
  double a1 = 1.0;  // mean-decay factor, exp(-int_0^t f)
  double a2 = 0.0;  // per-coordinate variance
};

struct GaussianMarginal {
  double mean = 0.0;
  double variance = 0.0;
};

// One forward SDE: a coefficient family, its parameters, and the experiment
// horizon. Built through the factory functions below, which reject degenerate
// parameters (the bound formulas divide by them).
struct ScheduleSpec {
  Family family = Family::VeConst;
  double horizon_T = 1.0;

  // VE parameters (a, b, c as in the family comments above).
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;

  // VP parameters.
  double beta_min = 0.0;
  double beta_max = 0.0;
  double rho = 1.0;

  std::function<double(double)> custom_f;
  std::function<double(double)> custom_g;

  double f(double t) const;
  double g(double t) const;
  double g_sq(double t) const { double v = g(t); return v * v; }
  // VP only: the noise scale beta(t) = 2 f(t).
  double beta(double t) const;

  ScheduleSpec with_horizon(double T) const;

  static ScheduleSpec ve_exp(double a, double b, double T);
  static ScheduleSpec ve_const(double a, double T);
  static ScheduleSpec ve_sqrt2at(double a, double T);
  static ScheduleSpec ve_poly(double a, double b, double c, double T);
  static ScheduleSpec vp_const(double beta_const, double T);
  static ScheduleSpec vp_linear(double beta_min, double beta_max, double T);
  static ScheduleSpec vp_poly(double beta_min, double beta_max, double rho, double T);
  static ScheduleSpec vp_exp(double beta_min, double beta_max, double T);
  static ScheduleSpec custom(std::function<double(double)> f,
                             std::function<double(double)> g, double T);
};

// int_{t0}^{t1} f(s) ds. Closed form for built-ins, quadrature for Custom.
double int_f(const ScheduleSpec& spec, double t0, double t1);

// int_{t0}^{t1} g(s)^2 ds.
double int_g2(const ScheduleSpec& spec, double t0, double t1);

// Kernel coefficients a1(t) = exp(-int_0^t f),
// a2(t) = int_0^t exp(-2 int_s^t f) g(s)^2 ds.
KernelParams kernel_params(const ScheduleSpec& spec, double t);

// The zero-mean Gaussian used to initialize the reverse process; its
// per-coordinate variance is a2(T).
GaussianMarginal prior_distribution(const ScheduleSpec& spec);

// Quadrature evaluation of the defining integrals, ignoring the closed forms.
// Cross-check path only (and the implementation behind Custom).
KernelParams kernel_params_by_quadrature(const ScheduleSpec& spec, double t,
                                         QuadratureOptions opt = {});

}  // namespace difflab
