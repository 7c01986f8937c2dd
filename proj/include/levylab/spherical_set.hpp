#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levylab/common.hpp"
#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"
#include "levylab/sphere.hpp"

namespace levylab {

/// A Borel subset of a unit sphere, carried as a membership predicate plus,
/// when available, an exact chordal distance-to-set evaluator.  Sets without
/// an exact evaluator can hold a sampled witness cloud of member points; the
/// cloud yields an upper bound on the distance, which is enough to confirm
/// membership of eps-neighborhoods (never to refute it).
template <typename Scalar = double>
struct SphericalSet {
  std::string label;
  Eigen::Index dimension = 0;
  std::function<bool(const Vector<Scalar>&)> member;
  std::function<double(const Vector<Scalar>&)> chordal_distance;  // may be empty
  std::shared_ptr<std::vector<Vector<Scalar>>> witness_cloud;     // may be null

  bool has_exact_distance() const { return static_cast<bool>(chordal_distance); }

  bool contains(const Vector<Scalar>& x) const { return member(x); }

  /// Exact distance when available, otherwise the cloud upper bound.
  double distance_upper(const Vector<Scalar>& x) const {
    if (chordal_distance) return chordal_distance(x);
    if (member(x)) return 0.0;
    if (!witness_cloud || witness_cloud->empty())
      throw std::invalid_argument("SphericalSet: no distance evaluator for '" + label + "'");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : *witness_cloud) {
      const double d = (x - c).norm();
      if (d < best) best = d;
    }
    return best;
  }

  /// Populates the witness cloud by rejection from the uniform measure.
  void build_witness_cloud(std::size_t attempts, std::uint64_t seed, std::size_t max_keep) {
    auto cloud = std::make_shared<std::vector<Vector<Scalar>>>();
    for (std::size_t i = 0; i < attempts && cloud->size() < max_keep; ++i) {
      RandomStream rng = RandomStream::for_sample(seed, i);
      Vector<Scalar> x = unit_sphere_point<Scalar>(dimension, rng);
      if (member(x)) cloud->push_back(std::move(x));
    }
    witness_cloud = std::move(cloud);
  }

  /// Verifies distance(x) == 0 <=> member(x) on random points; returns the
  /// number of disagreements (boundary grazing tolerated via `slack`).
  std::size_t self_check(std::size_t samples, std::uint64_t seed, double slack = 1e-12) const {
    if (!chordal_distance) return 0;
    return parallel_count(samples, [&](std::size_t i) {
      RandomStream rng = RandomStream::for_sample(seed, i);
      const Vector<Scalar> x = unit_sphere_point<Scalar>(dimension, rng);
      const bool in = member(x);
      const double dist = chordal_distance(x);
      return in ? (dist > slack) : (dist <= slack);
    });
  }
};

/// { x : ||P_mask x|| >= c }  or  { x : ||P_mask x|| <= c }  with the exact
/// chordal distance:  rotating inside the plane spanned by the two block
/// components is optimal, so for block mass t the distance to the threshold
/// set is 2 sin(|arccos t - arccos c| / 2) (zero when the constraint holds).
enum class MaskSide { AtLeast, AtMost };

template <typename Scalar = double>
SphericalSet<Scalar> mask_threshold_set(std::string label, Eigen::Index d,
                                        std::vector<Eigen::Index> mask, double c, MaskSide side) {
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("mask_threshold_set: c outside [0,1]");
  for (Eigen::Index i : mask)
    if (i < 0 || i >= d) throw std::invalid_argument("mask_threshold_set: index out of range");
  SphericalSet<Scalar> s;
  s.label = std::move(label);
  s.dimension = d;
  auto mass = [mask = std::move(mask)](const Vector<Scalar>& x) {
    return std::sqrt(mask_norm_sq(mask, x));
  };
  s.member = [mass, c, side](const Vector<Scalar>& x) {
    const double t = mass(x);
    return side == MaskSide::AtLeast ? t >= c : t <= c;
  };
  s.chordal_distance = [mass, c, side](const Vector<Scalar>& x) {
    const double t = clamp_unit(mass(x));
    const bool in = side == MaskSide::AtLeast ? t >= c : t <= c;
    if (in) return 0.0;
    const double u = std::acos(t);
    const double v = std::acos(clamp_unit(c));
    return 2.0 * std::sin(0.5 * std::abs(u - v));
  };
  return s;
}

/// Closed cap of geodesic radius `radius` around `center` (radius pi/2 gives
/// the closed half-sphere).  Exact chordal distance from the angle excess.
template <typename Scalar = double>
SphericalSet<Scalar> cap_set(std::string label, const Vector<Scalar>& center, double radius) {
  if (radius < 0.0 || radius > kPi)
    throw std::invalid_argument("cap_set: radius outside [0, pi]");
  const double n = center.norm();
  if (!(n > 0.0)) throw std::invalid_argument("cap_set: zero center");
  Vector<Scalar> w = center / n;
  SphericalSet<Scalar> s;
  s.label = std::move(label);
  s.dimension = w.size();
  s.member = [w, radius](const Vector<Scalar>& x) {
    return std::acos(clamp_unit(real_part(Scalar(x.dot(w))))) <= radius + 1e-15;
  };
  s.chordal_distance = [w, radius](const Vector<Scalar>& x) {
    const double ang = std::acos(clamp_unit(real_part(Scalar(x.dot(w)))));
    return ang <= radius ? 0.0 : 2.0 * std::sin(0.5 * (ang - radius));
  };
  return s;
}

template <typename Scalar = double>
SphericalSet<Scalar> whole_sphere(Eigen::Index d) {
  SphericalSet<Scalar> s;
  s.label = "sphere";
  s.dimension = d;
  s.member = [](const Vector<Scalar>&) { return true; };
  s.chordal_distance = [](const Vector<Scalar>&) { return 0.0; };
  return s;
}

/// A finite family of sets intended to cover the sphere.
template <typename Scalar = double>
struct Cover {
  std::vector<SphericalSet<Scalar>> sets;

  /// Number of uniform samples (out of m) not covered by any element.
  std::size_t empirical_uncovered(std::size_t m, std::uint64_t seed) const {
    if (sets.empty()) throw std::invalid_argument("Cover: empty family");
    const Eigen::Index d = sets.front().dimension;
    return parallel_count(m, [&](std::size_t i) {
      RandomStream rng = RandomStream::for_sample(seed, i);
      const Vector<Scalar> x = unit_sphere_point<Scalar>(d, rng);
      for (const auto& s : sets)
        if (s.member(x)) return false;
      return true;
    });
  }
};

}  // namespace levylab
