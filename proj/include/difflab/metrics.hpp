#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace difflab {

// W2 between two zero-mean isotropic Gaussians with per-coordinate variances
// var1 and var2 in dimension d.
inline double w2_gaussian_isotropic(double var1, double var2, int d) {
  if (!(var1 >= 0.0 && var2 >= 0.0))
    throw std::invalid_argument("variances must be nonnegative");
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  return std::sqrt(static_cast<double>(d)) *
         std::fabs(std::sqrt(var1) - std::sqrt(var2));
}

// Diagonal-covariance Gaussians: W2^2 = |m1 - m2|^2 + sum (sqrt c1 - sqrt c2)^2.
inline double w2_gaussian_general(std::span<const double> mean1,
                                  std::span<const double> cov_diag1,
                                  std::span<const double> mean2,
                                  std::span<const double> cov_diag2) {
  const std::size_t d = mean1.size();
  if (mean2.size() != d || cov_diag1.size() != d || cov_diag2.size() != d)
    throw std::invalid_argument("w2_gaussian_general: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(cov_diag1[i] >= 0.0 && cov_diag2[i] >= 0.0))
      throw std::invalid_argument("covariance diagonals must be nonnegative");
    const double dm = mean1[i] - mean2[i];
    const double ds = std::sqrt(cov_diag1[i]) - std::sqrt(cov_diag2[i]);
    acc += dm * dm + ds * ds;
  }
  return std::sqrt(acc);
}

// Exact empirical W2 in one dimension via the order-statistics coupling.
inline double w2_empirical_1d(std::span<const double> samples_a,
                              std::span<const double> samples_b) {
  if (samples_a.size() != samples_b.size())
    throw std::invalid_argument("w2_empirical_1d requires equal sample counts");
  if (samples_a.empty())
    throw std::invalid_argument("w2_empirical_1d requires nonempty samples");
  std::vector<double> a(samples_a.begin(), samples_a.end());
  std::vector<double> b(samples_b.begin(), samples_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace difflab
