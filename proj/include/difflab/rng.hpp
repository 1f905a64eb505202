#pragma once

#include <cmath>
#include <cstdint>

namespace difflab {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: the output sequence is a pure function of
// (seed, chain, step, lane), so chains and steps can be evaluated in any
// order, on any number of threads, with bit-identical results.
//
// Stream layout used by the sampler:
//   lane 0 — integrator noise for step k of a chain
//   lane 1 — prior draw of a chain (step 0)
//   lane 2 — score perturbation noise for step k of a chain
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t step,
             std::uint64_t lane) noexcept {
    using detail::kGolden;
    using detail::mix64;
    std::uint64_t k = mix64(seed + kGolden);
    k = mix64(k ^ (chain + kGolden));
    k = mix64(k ^ (step + kGolden));
    key_ = mix64(k ^ (lane + kGolden));
  }

  std::uint64_t next_u64() noexcept {
    counter_ += detail::kGolden;
    return detail::mix64(key_ + counter_);
  }

  // Uniform on the open interval (0, 1); safe to pass to log().
  double next_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Standard normal draws on top of CounterRng (Marsaglia polar method, with
// the usual spare-value cache). One stream per (chain, step, lane).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t chain, std::uint64_t step,
                 std::uint64_t lane) noexcept
      : rng_(seed, chain, step, lane) {}

  double next() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * rng_.next_open01() - 1.0;
      v = 2.0 * rng_.next_open01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

 private:
  CounterRng rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace difflab
