#include <doctest.h>

#include <cmath>
#include <vector>

#include "difflab/quadrature.hpp"
#include "difflab/rng.hpp"

#include "oracle_helpers.hpp"

using namespace difflab;

TEST_CASE("adaptive simpson reproduces elementary integrals") {
  auto r1 = integrate_adaptive([](double x) { return x * x; }, 0.0, 3.0);
  CHECK(r1.converged);
  CHECK(r1.value == doctest::Approx(9.0).epsilon(1e-13));

  auto r2 = integrate_adaptive([](double x) { return std::exp(2.0 * x); }, 0.0, 1.0);
  CHECK(r2.value == doctest::Approx(0.5 * (std::exp(2.0) - 1.0)).epsilon(1e-12));

  auto r3 = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r3.value == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
}

TEST_CASE("adaptive simpson handles a kinked integrand") {
  // min() branch switch, the only non-smoothness the bound integrands have
  auto kink = [](double x) { return std::min(1.0 / (x + 0.1), 2.0); };
  auto r = integrate_adaptive(kink, 0.0, 1.0);
  const double expected = 2.0 * 0.4 + std::log(1.1 / 0.5);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("counter rng is a pure function of its key") {
  CounterRng a(7, 3, 11, 0);
  CounterRng b(7, 3, 11, 0);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(7, 3, 12, 0), d(7, 4, 11, 0), e(8, 3, 11, 0), f(7, 3, 11, 1);
  CounterRng ref(7, 3, 11, 0);
  const auto v = ref.next_u64();
  CHECK(c.next_u64() != v);
  CHECK(d.next_u64() != v);
  CHECK(e.next_u64() != v);
  CHECK(f.next_u64() != v);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  CounterRng rng(123, 0, 0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian stream has standard moments") {
  const long n = 400000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
  GaussianStream g(2024, 1, 1, 0);
  for (long i = 0; i < n; ++i) {
    const double z = g.next();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  // 4-sigma bands
  CHECK(std::fabs(sum * inv_n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(sum2 * inv_n - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
  CHECK(std::fabs(sum3 * inv_n) < 4.0 * std::sqrt(15.0 / static_cast<double>(n)));
}

TEST_CASE("gaussian streams for different steps are uncorrelated") {
  const long n = 200000;
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    GaussianStream g1(99, static_cast<std::uint64_t>(i), 1, 0);
    GaussianStream g2(99, static_cast<std::uint64_t>(i), 2, 0);
    acc += g1.next() * g2.next();
  }
  CHECK(std::fabs(acc / static_cast<double>(n)) <
        4.0 / std::sqrt(static_cast<double>(n)));
}
