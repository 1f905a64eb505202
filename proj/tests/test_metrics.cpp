#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "difflab/metrics.hpp"
#include "difflab/rng.hpp"

#include "oracle_helpers.hpp"

using namespace difflab;

TEST_CASE("isotropic gaussian W2") {
  CHECK(w2_gaussian_isotropic(1.0, 1.0, 7) == 0.0);
  CHECK(w2_gaussian_isotropic(2.25, 1.0, 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w2_gaussian_isotropic(0.25, 4.0, 9) ==
        doctest::Approx(w2_gaussian_isotropic(4.0, 0.25, 9)).epsilon(1e-14));
  CHECK_THROWS_AS((void)w2_gaussian_isotropic(-1.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("diagonal gaussian W2") {
  std::vector<double> m1{1.0, 2.0}, m2{1.0, 2.0}, c1{0.5, 0.5}, c2{0.5, 0.5};
  CHECK(w2_gaussian_general(m1, c1, m2, c2) == 0.0);

  // pure mean shift: the Euclidean distance of the means
  std::vector<double> m3{4.0, 6.0};
  CHECK(w2_gaussian_general(m1, c1, m3, c1) == doctest::Approx(5.0).epsilon(1e-14));

  // isotropic case reduces to the isotropic formula
  std::vector<double> z{0.0, 0.0, 0.0}, v1(3, 2.25), v2(3, 1.0);
  CHECK(w2_gaussian_general(z, v1, z, v2) ==
        doctest::Approx(w2_gaussian_isotropic(2.25, 1.0, 3)).epsilon(1e-14));

  std::vector<double> short_mean{0.0};
  CHECK_THROWS_AS((void)w2_gaussian_general(short_mean, c1, m1, c2),
                  std::invalid_argument);
}

TEST_CASE("empirical 1-d W2") {
  std::vector<double> a{3.0, 1.0, 2.0}, b{2.0, 3.0, 1.0};
  CHECK(w2_empirical_1d(a, b) == 0.0);

  // constant shift delta moves the coupling by exactly delta
  std::vector<double> shifted;
  for (double v : a) shifted.push_back(v + 0.75);
  CHECK(w2_empirical_1d(a, shifted) == doctest::Approx(0.75).epsilon(1e-14));

  std::vector<double> unequal{1.0, 2.0};
  CHECK_THROWS_AS((void)w2_empirical_1d(a, unequal), std::invalid_argument);
}

TEST_CASE("empirical W2 of gaussian samples matches the closed form") {
  const std::size_t n = 100000;
  const double sd_a = 1.0, sd_b = 1.6;
  std::vector<double> a(n), b(n);
  GaussianStream ga(31, 0, 0, 0), gb(31, 1, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = sd_a * ga.next();
    b[i] = sd_b * gb.next();
  }
  const double empirical = w2_empirical_1d(a, b);
  const double closed = w2_gaussian_isotropic(sd_a * sd_a, sd_b * sd_b, 1);

  // bootstrap the sampling error of the empirical estimate
  const int reps = 40;
  std::vector<double> boot(reps);
  CounterRng pick(77, 0, 0, 0);
  std::vector<double> ra(n), rb(n);
  for (int r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      ra[i] = a[pick.next_u64() % n];
      rb[i] = b[pick.next_u64() % n];
    }
    boot[r] = w2_empirical_1d(ra, rb);
  }
  const auto stats = oracle::batch_stats(boot);
  const double se = std::max(stats.stderr_of_mean * std::sqrt(double(reps)), 1e-6);
  CHECK(std::fabs(empirical - closed) <= 3.0 * se);
}

TEST_CASE("all W2 paths agree on 1-d gaussian data") {
  const std::size_t n = 200000;
  const double var1 = 0.49, var2 = 1.44;
  std::vector<double> a(n), b(n);
  GaussianStream ga(5, 0, 0, 0), gb(5, 1, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::sqrt(var1) * ga.next();
    b[i] = std::sqrt(var2) * gb.next();
  }
  const double iso = w2_gaussian_isotropic(var1, var2, 1);
  std::vector<double> zero{0.0}, v1{var1}, v2{var2};
  const double diag = w2_gaussian_general(zero, v1, zero, v2);
  const double empirical = w2_empirical_1d(a, b);
  CHECK(iso == doctest::Approx(diag).epsilon(1e-14));
  CHECK(empirical == doctest::Approx(iso).epsilon(0.02));
}

TEST_CASE("triangle inequality on sampled triples") {
  oracle::TestUniform u(13);
  const std::size_t n = 512;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(n), b(n), c(n);
    GaussianStream g(static_cast<std::uint64_t>(rep), 0, 0, 0);
    const double sa = u.next(0.2, 2.0), sb = u.next(0.2, 2.0), sc = u.next(0.2, 2.0);
    const double ma = u.next(-1.0, 1.0), mb = u.next(-1.0, 1.0), mc = u.next(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ma + sa * g.next();
      b[i] = mb + sb * g.next();
      c[i] = mc + sc * g.next();
    }
    const double ab = w2_empirical_1d(a, b);
    const double bc = w2_empirical_1d(b, c);
    const double ac = w2_empirical_1d(a, c);
    CHECK(ac <= ab + bc + 1e-12);
  }
}
