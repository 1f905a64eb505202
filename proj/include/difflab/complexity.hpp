#pragma once

#include <string>
#include <vector>

#include "difflab/schedule.hpp"

namespace difflab {

struct ComplexityQuery {
  double eps = 0.1;  // target W2 accuracy
  int d = 1;
  // Regularity constants used by the constant-coefficient prescription.
  double m0 = 1.0;
  double L0 = 1.0;
  double x_star_norm = 0.0;
  double M1 = 0.0;
};

// What the complexity analysis prescribes to reach eps accuracy: horizon, stepsize cap,
// score-error cap, and the implied minimal step count. Multiplicative
// constants the analysis suppresses are reported as 1; `order_value` is the
// order expression evaluated literally so prescriptions can be compared.
struct Prescription {
  Family family = Family::VeConst;
  std::string params;
  double T_val = 0.0;    // K eta
  double eta_max = 0.0;
  double M_max = 0.0;
  long K_min = 0;        // ceil(T_val / eta_max)
  std::string order_label;
  double order_value = 0.0;
  std::string note;
};

// Closed-form prescription for one of the eight built-in families. The
// constant-beta family routes through the constant-coefficient result with
// alpha = beta/2, sigma = sqrt(beta); the linear-beta family is the rho = 1
// polynomial case. Custom schedules are unsupported.
Prescription prescribe(const ScheduleSpec& family, const ComplexityQuery& query);

// Constant-coefficient forward SDE, f = alpha, g = sigma, with fully explicit
// constants. Requires m0 >= 2 alpha / sigma^2.
Prescription prescribe_const_coeff(double alpha, double sigma,
                                   const ComplexityQuery& query);

// General VP result: beta positive and increasing with growth condition
// beta(t) <= c1 (int_0^t beta)^{c3} + c2. The growth constants are inputs and
// the condition is checked numerically over the solved horizon.
struct VpGrowthConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};
Prescription prescribe_vp_general(const ScheduleSpec& family,
                                  const ComplexityQuery& query,
                                  const VpGrowthConstants& growth);

struct OrderingReport {
  std::vector<Prescription> ranked;  // ascending K_min
  // K_min ratio of the constant-g VE family over the exponential-g VE family
  // (the phase transition); 0 when either family is absent.
  double ve_const_over_ve_exp = 0.0;
  bool phase_transition_flagged = false;
};

// Evaluates K_min across families at a common (eps, d) and ranks them.
OrderingReport ordering_report(const std::vector<ScheduleSpec>& families,
                               const ComplexityQuery& query);

// Gaussian-data comparator sqrt(d)/eps (constants suppressed).
double lower_bound_gaussian(const ComplexityQuery& query);

}  // namespace difflab
