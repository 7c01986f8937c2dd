#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "levylab/common.hpp"
#include "levylab/parallel.hpp"
#include "levylab/quadrature.hpp"
#include "levylab/rng.hpp"

namespace levylab {

/// A point on the unit sphere of R^d or C^d.  Construction checks the norm;
/// use normalized() to project an arbitrary nonzero vector onto the sphere.
template <typename Scalar = double>
class UnitVector {
 public:
  explicit UnitVector(Vector<Scalar> v) : coords_(std::move(v)) {
    if (coords_.size() == 0) throw std::invalid_argument("UnitVector: empty vector");
    if (std::abs(coords_.norm() - 1.0) > kUnitNormTol)
      throw std::invalid_argument("UnitVector: norm differs from 1 beyond tolerance");
  }

  static UnitVector normalized(const Vector<Scalar>& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("UnitVector::normalized: zero vector");
    return UnitVector(Vector<Scalar>(v / n));
  }

  const Vector<Scalar>& coords() const { return coords_; }
  Eigen::Index dimension() const { return coords_.size(); }

 private:
  Vector<Scalar> coords_;
};

/// i.i.d. uniform points on the unit sphere of R^d (or C^d, identified with
/// the real sphere of dimension 2d-1), via normalized standard Gaussians.
/// Sample i draws from a stream derived from (seed, i) alone, so the result
/// does not depend on the worker count.
template <typename Scalar = double>
std::vector<UnitVector<Scalar>> sample_uniform(Eigen::Index d, std::size_t m, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_uniform: dimension must be positive");
  if (m == 0) throw std::invalid_argument("sample_uniform: sample count must be positive");
  std::vector<Vector<Scalar>> raw(m);
  parallel_for(m, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_sample(seed, i);
    raw[i] = unit_sphere_point<Scalar>(d, rng);
  });
  std::vector<UnitVector<Scalar>> out;
  out.reserve(m);
  for (auto& v : raw) out.emplace_back(std::move(v));
  return out;
}

/// Geodesic (great-circle) distance, arccos of the real inner product.
template <typename Scalar>
double geodesic_distance(const UnitVector<Scalar>& x, const UnitVector<Scalar>& y) {
  if (x.dimension() != y.dimension())
    throw std::invalid_argument("geodesic_distance: dimension mismatch");
  return std::acos(clamp_unit(real_part(Scalar(y.coords().dot(x.coords())))));
}

inline double chordal_from_geodesic(double t) { return 2.0 * std::sin(0.5 * t); }
inline double geodesic_from_chordal(double c) { return 2.0 * std::asin(clamp_unit(0.5 * c)); }

/// Gaussian concentration bound sqrt(pi/8) * exp(-eps^2 * n / 2) for the
/// sphere of dimension n + 1.
inline double levy_bound(int n, double eps) {
  if (n < 1) throw std::invalid_argument("levy_bound: n must be >= 1");
  if (eps < 0.0) throw std::invalid_argument("levy_bound: eps must be >= 0");
  return std::sqrt(std::atan(1.0) / 2.0) * std::exp(-0.5 * eps * eps * static_cast<double>(n));
}

namespace detail {

// integral of sin^(n-1) over [0, theta], to absolute error <= 1e-10
inline double sin_power_integral(int n, double theta) {
  return adaptive_simpson(
      [n](double t) { return std::pow(std::sin(t), n - 1); }, 0.0, theta, 1e-10);
}

}  // namespace detail

/// Concentration function of the n-dimensional round sphere: the extremal set
/// of measure 1/2 is a half-sphere, whose eps-neighborhood is a cap, so
///   alpha(eps) = 1 - J_n(pi/2 + eps) / J_n(pi),  J_n(t) = integral sin^(n-1).
/// Evaluated through the complementary integral over [pi/2 + eps, pi], which
/// is the same number but keeps its relative accuracy when the tail is many
/// orders below the quadrature's absolute tolerance.  eps is geodesic and
/// must lie in [0, pi/2].
inline double cap_alpha_exact(int n, double eps) {
  if (n < 1) throw std::invalid_argument("cap_alpha_exact: n must be >= 1");
  constexpr double half_pi = 1.5707963267948966;
  if (eps < 0.0 || eps > half_pi + 1e-15)
    throw std::invalid_argument("cap_alpha_exact: eps must lie in [0, pi/2]");
  if (eps == 0.0) return 0.5;
  const double full = detail::sin_power_integral(n, 2.0 * half_pi);
  const double tail = adaptive_simpson([n](double t) { return std::pow(std::sin(t), n - 1); },
                                       half_pi + eps, 2.0 * half_pi, 1e-10);
  return tail / full;
}

/// Largest singular value.
template <typename Scalar>
double operator_norm(const Matrix<Scalar>& t) {
  if (t.rows() == 0 || t.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(t);
  return svd.singularValues()(0);
}

/// The quadratic form xi -> <T xi, xi>.  On the unit sphere this functional is
/// Lipschitz with constant 2 * ||T||.
template <typename Scalar>
Scalar quadratic_functional(const Matrix<Scalar>& t, const UnitVector<Scalar>& xi) {
  if (t.rows() != t.cols()) throw std::invalid_argument("quadratic_functional: matrix not square");
  if (t.rows() != xi.dimension())
    throw std::invalid_argument("quadratic_functional: dimension mismatch");
  return xi.coords().dot(t * xi.coords());
}

/// Squared mass a unit vector carries on a coordinate set:  sum of |f_i|^2
/// over i in mask.  On the unit sphere this functional is 2-Lipschitz, and its
/// square root is 1-Lipschitz.
template <typename Scalar>
double mask_norm_sq(const std::vector<Eigen::Index>& mask, const Vector<Scalar>& f) {
  double s = 0.0;
  for (Eigen::Index i : mask) {
    if (i < 0 || i >= f.size())
      throw std::invalid_argument("mask_norm_sq: coordinate index out of range");
    s += std::norm(f[i]);
  }
  return s;
}

template <typename Scalar>
double mask_norm_sq(const std::vector<Eigen::Index>& mask, const UnitVector<Scalar>& f) {
  return mask_norm_sq(mask, f.coords());
}

struct LipschitzCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |f(x)-f(y)| / (L * dist(x,y))
};

/// Checks |F(x) - F(y)| <= L * ||x - y|| over random pairs on the sphere.
template <typename Scalar, typename F>
LipschitzCheck lipschitz_check(F&& functional, double lipschitz_constant, Eigen::Index d,
                               std::size_t pairs, std::uint64_t seed, double slack = 1e-9) {
  LipschitzCheck out;
  out.pairs = pairs;
  struct Acc {
    std::size_t viol = 0;
    double worst = 0.0;
  };
  Acc acc = parallel_map_reduce<Acc>(
      pairs, Acc{},
      [&](std::size_t first, std::size_t last) {
        Acc a;
        for (std::size_t i = first; i < last; ++i) {
          RandomStream rng = RandomStream::for_sample(seed, i);
          const Vector<Scalar> x = unit_sphere_point<Scalar>(d, rng);
          const Vector<Scalar> y = unit_sphere_point<Scalar>(d, rng);
          const double dist = (x - y).norm();
          if (dist < 1e-12) continue;
          const double diff = std::abs(functional(x) - functional(y));
          const double ratio = diff / (lipschitz_constant * dist);
          if (ratio > a.worst) a.worst = ratio;
          if (diff > lipschitz_constant * dist + slack) ++a.viol;
        }
        return a;
      },
      [](Acc a, Acc b) {
        a.viol += b.viol;
        if (b.worst > a.worst) a.worst = b.worst;
        return a;
      });
  out.violations = acc.viol;
  out.worst_ratio = acc.worst;
  return out;
}

}  // namespace levylab
