#pragma once

#include <cmath>
#include <cstdint>

#include "levylab/common.hpp"

namespace levylab {

// Counter-seeded SplitMix64 stream.  Every Monte Carlo sample draws from its
// own stream derived from (seed, sample index), so partitioning a loop across
// workers cannot change which bits a sample sees.  The generator is fully
// specified here rather than delegated to <random> distributions, whose
// algorithms are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {
    // Two warm-up scrambles decorrelate nearby seeds.
    next_raw();
    next_raw();
  }

  static RandomStream for_sample(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(mix(seed ^ mix(index + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t next_raw() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_raw() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t next_below(std::uint64_t bound) {
    // Rejection from the top of the range keeps the draw unbiased.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v = next_raw();
    while (v >= limit) v = next_raw();
    return v % bound;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

template <typename Scalar>
Vector<Scalar> gaussian_vector(Eigen::Index d, RandomStream& rng) {
  Vector<Scalar> v(d);
  if constexpr (is_complex_v<Scalar>) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double re = rng.next_gaussian();
      const double im = rng.next_gaussian();
      v[i] = Scalar(re, im);
    }
  } else {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.next_gaussian();
  }
  return v;
}

// Uniform point on the unit sphere of R^d (or of C^d, sampled as the real
// sphere of twice the dimension): normalize a standard Gaussian vector.
template <typename Scalar>
Vector<Scalar> unit_sphere_point(Eigen::Index d, RandomStream& rng) {
  for (;;) {
    Vector<Scalar> v = gaussian_vector<Scalar>(d, rng);
    const double n = v.norm();
    if (n > 1e-30) return v / n;
  }
}

}  // namespace levylab
