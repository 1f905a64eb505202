#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "difflab/complexity.hpp"

using namespace difflab;

namespace {

std::vector<ScheduleSpec> table_families() {
  return {ScheduleSpec::ve_exp(1.0, 1.0, 1.0),
          ScheduleSpec::ve_const(1.0, 1.0),
          ScheduleSpec::ve_sqrt2at(1.0, 1.0),
          ScheduleSpec::ve_poly(1.0, 1.0, 1.0, 1.0),
          ScheduleSpec::vp_const(1.0, 1.0),
          ScheduleSpec::vp_linear(0.1, 20.0, 1.0),
          ScheduleSpec::vp_poly(0.1, 20.0, 5.0, 1.0),
          ScheduleSpec::vp_exp(0.1, 20.0, 1.0)};
}

}  // namespace

TEST_CASE("exponential-g prescription, pinned fixture") {
  ComplexityQuery q{0.1, 16};
  const auto p = prescribe(ScheduleSpec::ve_exp(1.0, 0.5, 1.0), q);
  CHECK(p.T_val == doctest::Approx(std::log(40.0)).epsilon(1e-14));
  CHECK(p.T_val == doctest::Approx(3.68888).epsilon(1e-5));
  CHECK(p.eta_max == doctest::Approx(6.25e-4).epsilon(1e-14));
  CHECK(p.M_max == doctest::Approx(0.1 / std::log(10.0)).epsilon(1e-14));
  CHECK(p.K_min == 5903);
  CHECK(p.order_label == "O(d*log(d/eps)/eps^2)");
}

TEST_CASE("remaining closed-form prescriptions match hand evaluation") {
  ComplexityQuery q{0.1, 16};
  const double eps = 0.1, d = 16.0;
  const double L = std::log(std::sqrt(d) / eps);

  {
    const auto p = prescribe(ScheduleSpec::ve_sqrt2at(1.0, 1.0), q);
    CHECK(p.T_val == doctest::Approx(std::pow(d, 0.25) / std::sqrt(eps)).epsilon(1e-14));
    CHECK(p.eta_max == doctest::Approx(eps * eps / d).epsilon(1e-14));
    CHECK(p.M_max == doctest::Approx(std::pow(eps, 1.5)).epsilon(1e-14));
    CHECK(p.K_min == 10120);
  }
  {
    const auto p = prescribe(ScheduleSpec::ve_poly(1.0, 1.0, 1.0, 1.0), q);
    CHECK(p.T_val ==
          doctest::Approx(std::pow(d, 1.0 / 6.0) / std::pow(eps, 1.0 / 3.0)).epsilon(1e-14));
    CHECK(p.M_max == doctest::Approx(std::pow(eps, 1.0 + 2.0 / 3.0)).epsilon(1e-14));
    CHECK(p.K_min == 5472);
  }
  {
    const auto p = prescribe(ScheduleSpec::ve_const(1.0, 1.0), q);
    const double Ld = std::log(d / eps);
    CHECK(p.T_val == doctest::Approx(std::sqrt(d) / eps).epsilon(1e-14));
    CHECK(p.eta_max == doctest::Approx(eps * eps / (d * Ld)).epsilon(1e-14));
    CHECK(p.M_max == doctest::Approx(eps / std::sqrt(Ld)).epsilon(1e-14));
    CHECK(p.order_label == "O(d^(3/2)*log(d/eps)/eps^3)");
  }
  {
    const double rho = 5.0;
    const double b = std::pow(0.1, 1.0 / rho);
    const double a = std::pow(20.0, 1.0 / rho) - b;
    const auto p = prescribe(ScheduleSpec::vp_poly(0.1, 20.0, rho, 1.0), q);
    const double T = std::pow(a * (rho + 1.0), 1.0 / (rho + 1.0)) / a *
                         std::pow(L, 1.0 / (rho + 1.0)) -
                     b / a;
    CHECK(p.T_val == doctest::Approx(T).epsilon(1e-13));
    CHECK(p.M_max == doctest::Approx(eps).epsilon(1e-14));
    CHECK(p.eta_max == doctest::Approx(eps * eps / d).epsilon(1e-14));
    CHECK(p.K_min == static_cast<long>(std::ceil(T / (eps * eps / d) - 1e-9)));
  }
  {
    const auto p = prescribe(ScheduleSpec::vp_exp(0.1, 20.0, 1.0), q);
    const double b = std::log(200.0);
    const double T = std::log(b / 0.1 * L) / b;
    CHECK(p.T_val == doctest::Approx(T).epsilon(1e-13));
    CHECK(p.M_max == doctest::Approx(eps).epsilon(1e-14));
    CHECK(p.order_label == "O(d*log(log(d/eps))/eps^2)");
  }
  {
    // linear beta routes through the rho = 1 polynomial formula
    const auto p = prescribe(ScheduleSpec::vp_linear(0.1, 20.0, 1.0), q);
    const double a = 19.9, b = 0.1;
    const double T = std::sqrt(2.0 * L / a) - b / a;
    CHECK(p.T_val == doctest::Approx(T).epsilon(1e-13));
    CHECK(p.order_label == "O(d*sqrt(log(d/eps))/eps^2)");
  }
}

TEST_CASE("constant-coefficient prescription") {
  ComplexityQuery q{0.1, 16, 1.5625, 1.5625, 0.0, 0.0};
  const double alpha = 0.5, sigma = 1.0;
  const auto p = prescribe_const_coeff(alpha, sigma, q);
  const double x0 = std::sqrt(2.0 * 16.0 / 1.5625);
  const double T = 1.0 / (2.0 * alpha) *
                   std::log((4.0 * x0 / 0.1 - 1.0) * 2.0 * alpha / (1.5625 * 1.0) + 1.0);
  CHECK(p.T_val == doctest::Approx(T).epsilon(1e-13));
  CHECK(p.M_max == doctest::Approx(0.1 * alpha / 8.0).epsilon(1e-14));
  const double c1t = x0 * (4.0 * alpha + 1.0 * 1.5625) +
                     alpha * std::sqrt(16.0 / (2.0 * alpha)) + std::sqrt(16.0);
  const double cap_eps = 0.01 * alpha * alpha /
                         (64.0 * c1t * c1t * std::pow(3.0 * alpha + 1.5625, 2.0));
  const double cap_fixed = alpha / (2.0 * alpha * alpha +
                                    2.0 * std::pow(2.0 * alpha + 1.5625, 2.0));
  CHECK(p.eta_max == doctest::Approx(std::min({1.0, cap_eps, cap_fixed})).epsilon(1e-13));

  // constant-beta schedules route here with alpha = beta/2, sigma = sqrt(beta)
  const auto routed = prescribe(ScheduleSpec::vp_const(1.0, 1.0), q);
  const auto direct = prescribe_const_coeff(0.5, 1.0, q);
  CHECK(routed.T_val == direct.T_val);
  CHECK(routed.K_min == direct.K_min);

  // requires m0 >= 2 alpha / sigma^2
  ComplexityQuery weak{0.1, 16, 0.5, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)prescribe_const_coeff(0.5, 1.0, weak), std::invalid_argument);
}

TEST_CASE("degenerate accuracy targets are rejected") {
  // log(sqrt(d)/eps) = 0
  ComplexityQuery boundary{2.0, 4};
  CHECK_THROWS_AS((void)prescribe(ScheduleSpec::ve_exp(1.0, 1.0, 1.0), boundary),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)prescribe(ScheduleSpec::vp_poly(0.1, 20.0, 5.0, 1.0), boundary),
                  std::invalid_argument);
  // constant-g regime needs d/eps > e
  ComplexityQuery tight{0.9, 2};
  CHECK_THROWS_AS((void)prescribe(ScheduleSpec::ve_const(1.0, 1.0), tight),
                  std::invalid_argument);
  // custom schedules carry no prescription
  auto custom = ScheduleSpec::custom([](double) { return 0.0; },
                                     [](double) { return 1.0; }, 1.0);
  CHECK_THROWS_AS((void)prescribe(custom, ComplexityQuery{0.1, 4}), std::invalid_argument);
  CHECK_THROWS_AS((void)lower_bound_gaussian(ComplexityQuery{-0.1, 4}),
                  std::invalid_argument);
}

TEST_CASE("gaussian lower-bound comparator") {
  CHECK(lower_bound_gaussian(ComplexityQuery{0.1, 16}) == doctest::Approx(40.0));
  CHECK(lower_bound_gaussian(ComplexityQuery{1.0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("every prescription clears the gaussian lower bound") {
  for (double eps : {0.2, 0.1, 0.05}) {
    for (int d : {4, 16, 64}) {
      ComplexityQuery q{eps, d, 1.5625, 1.5625, 0.0, 0.0};
      const double lb = lower_bound_gaussian(q);
      for (const auto& family : table_families()) {
        const auto p = prescribe(family, q);
        CHECK(static_cast<double>(p.K_min) >= lb);
      }
    }
  }
}

TEST_CASE("prescriptions grow as the target tightens or dimension grows") {
  for (const auto& family : table_families()) {
    long prev = 0;
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto p = prescribe(family, ComplexityQuery{eps, 16, 1.5625, 1.5625, 0.0, 0.0});
      CHECK(p.K_min > prev);
      prev = p.K_min;
    }
    prev = 0;
    for (int d : {4, 16, 64}) {
      const auto p = prescribe(family, ComplexityQuery{0.1, d, 1.5625, 1.5625, 0.0, 0.0});
      CHECK(p.K_min > prev);
      prev = p.K_min;
    }
  }
}

TEST_CASE("polynomial-beta order improves with the exponent") {
  // the asymptotic class log(d/eps)^(1/(rho+1)) shrinks as rho grows
  ComplexityQuery q{0.05, 64};
  double prev = std::numeric_limits<double>::infinity();
  for (double rho : {1.0, 2.0, 3.0, 5.0, 7.0, 10.0}) {
    const auto p = prescribe(ScheduleSpec::vp_poly(0.1, 20.0, rho, 1.0), q);
    CHECK(p.order_value < prev);
    prev = p.order_value;
  }
}

TEST_CASE("ordering report ranks and flags the constant-g penalty") {
  ComplexityQuery q{0.05, 64, 1.5625, 1.5625, 0.0, 0.0};
  const auto report = ordering_report(table_families(), q);
  REQUIRE(report.ranked.size() == 8);
  for (std::size_t i = 1; i < report.ranked.size(); ++i)
    CHECK(report.ranked[i - 1].K_min <= report.ranked[i].K_min);
  CHECK(report.ve_const_over_ve_exp > 1.0);
  CHECK(report.phase_transition_flagged);

  // the constant-g VE family needs the most steps of the VE group
  long k_const = 0, k_worst_other_ve = 0;
  for (const auto& p : report.ranked) {
    if (p.family == Family::VeConst) k_const = p.K_min;
    if (is_ve(p.family) && p.family != Family::VeConst)
      k_worst_other_ve = std::max(k_worst_other_ve, p.K_min);
  }
  CHECK(k_const > k_worst_other_ve);
}

TEST_CASE("VP families keep the 1/eps^2 scaling") {
  for (const auto& family : table_families()) {
    if (!is_vp(family.family)) continue;
    const auto p1 = prescribe(family, ComplexityQuery{0.05, 64, 1.5625, 1.5625, 0.0, 0.0});
    const auto p2 = prescribe(family, ComplexityQuery{0.025, 64, 1.5625, 1.5625, 0.0, 0.0});
    const double ratio = static_cast<double>(p2.K_min) / static_cast<double>(p1.K_min);
    CHECK(ratio > 3.8);
    CHECK(ratio < 4.5);
  }
}

TEST_CASE("general VP prescription") {
  ComplexityQuery q{0.1, 16};
  auto spec = ScheduleSpec::vp_linear(0.1, 20.0, 1.0);
  const VpGrowthConstants growth{10.0, 1.0, 0.5};
  const auto p = prescribe_vp_general(spec, q, growth);
  // horizon solves int beta = log(sqrt(d)/eps)
  const double L = std::log(std::sqrt(16.0) / 0.1);
  const double T = (-0.1 + std::sqrt(0.01 + 4.0 * 9.95 * L)) / (2.0 * 9.95);
  CHECK(p.T_val == doctest::Approx(T).epsilon(1e-9));
  CHECK(p.M_max == doctest::Approx(0.1 / std::sqrt(L)).epsilon(1e-12));
  const double eta = 0.01 / (16.0 * std::pow(std::log(10.0), 6.0));
  CHECK(p.eta_max == doctest::Approx(eta).epsilon(1e-12));

  // a growth envelope that beta outruns is rejected
  const VpGrowthConstants too_small{0.1, 0.1, 0.5};
  CHECK_THROWS_AS((void)prescribe_vp_general(spec, q, too_small), std::invalid_argument);
  CHECK_THROWS_AS((void)prescribe_vp_general(ScheduleSpec::ve_const(1.0, 1.0), q, growth),
                  std::invalid_argument);
}
