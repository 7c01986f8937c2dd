#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "levylab/common.hpp"
#include "levylab/permutation.hpp"
#include "levylab/sphere.hpp"
#include "levylab/words.hpp"

namespace levylab {

/// Norm-preserving linear map in one of four shapes: a dense unitary matrix,
/// a (possibly partial) basis map, a unimodular scalar, or a direct sum.
///
/// A partial basis map arises from truncating a group representation to a
/// finite universe: basis vectors whose image leaves the universe have no
/// image.  Such an action carries a support promise -- callers only apply it
/// to vectors supported on coordinates with defined images; a nonzero
/// coordinate without an image raises SupportViolationError.
template <typename Scalar = double>
class UnitaryAction {
 public:
  static constexpr Eigen::Index kNoImage = -1;

  struct Dense {
    Matrix<Scalar> matrix;
  };
  struct BasisMap {
    // image[i] = target index of basis vector i, or kNoImage.
    std::vector<Eigen::Index> image;
  };
  struct ScalarMul {
    Scalar factor;
    Eigen::Index dimension;
  };
  struct DirectSum {
    std::vector<UnitaryAction> blocks;
  };

  static UnitaryAction dense(std::string label, Matrix<Scalar> u) {
    if (u.rows() != u.cols()) throw std::invalid_argument("UnitaryAction: matrix not square");
    const double err =
        (u.adjoint() * u - Matrix<Scalar>::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-10)
      throw std::invalid_argument("UnitaryAction: matrix is not unitary within tolerance");
    return UnitaryAction(std::move(label), Dense{std::move(u)});
  }

  static UnitaryAction basis_permutation(std::string label, std::vector<Eigen::Index> image) {
    std::vector<bool> hit(image.size(), false);
    for (Eigen::Index v : image) {
      if (v == kNoImage) continue;
      if (v < 0 || v >= static_cast<Eigen::Index>(image.size()) || hit[v])
        throw std::invalid_argument("UnitaryAction: basis map is not injective into range");
      hit[v] = true;
    }
    return UnitaryAction(std::move(label), BasisMap{std::move(image)});
  }

  static UnitaryAction scalar(std::string label, Scalar factor, Eigen::Index dimension) {
    if (std::abs(std::abs(factor) - 1.0) > 1e-12)
      throw std::invalid_argument("UnitaryAction: scalar factor must be unimodular");
    if (dimension < 1) throw std::invalid_argument("UnitaryAction: dimension must be positive");
    return UnitaryAction(std::move(label), ScalarMul{factor, dimension});
  }

  static UnitaryAction direct_sum(std::string label, std::vector<UnitaryAction> blocks) {
    if (blocks.empty()) throw std::invalid_argument("UnitaryAction: empty direct sum");
    return UnitaryAction(std::move(label), DirectSum{std::move(blocks)});
  }

  const std::string& label() const { return label_; }

  Eigen::Index dimension() const {
    return std::visit(
        [](const auto& v) -> Eigen::Index {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            return v.matrix.rows();
          } else if constexpr (std::is_same_v<T, BasisMap>) {
            return static_cast<Eigen::Index>(v.image.size());
          } else if constexpr (std::is_same_v<T, ScalarMul>) {
            return v.dimension;
          } else {
            Eigen::Index d = 0;
            for (const auto& b : v.blocks) d += b.dimension();
            return d;
          }
        },
        shape_);
  }

  bool is_partial() const {
    return std::visit(
        [](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, BasisMap>) {
            for (Eigen::Index t : v.image)
              if (t == kNoImage) return true;
            return false;
          } else if constexpr (std::is_same_v<T, DirectSum>) {
            for (const auto& b : v.blocks)
              if (b.is_partial()) return true;
            return false;
          } else {
            return false;
          }
        },
        shape_);
  }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    if (x.size() != dimension())
      throw std::invalid_argument("UnitaryAction::apply: dimension mismatch");
    return apply_unchecked(x, false);
  }

  Vector<Scalar> apply_inverse(const Vector<Scalar>& x) const {
    if (x.size() != dimension())
      throw std::invalid_argument("UnitaryAction::apply_inverse: dimension mismatch");
    return apply_unchecked(x, true);
  }

  /// Dense matrix of the action.  A partial basis map materializes as the
  /// compression that sends unmapped basis vectors to zero; this is the
  /// corner P U P of the full operator and is what averaged-operator
  /// computations want.  Pass allow_compression = false to forbid it.
  Matrix<Scalar> to_matrix(bool allow_compression = true) const {
    if (!allow_compression && is_partial())
      throw SupportViolationError("UnitaryAction::to_matrix: '" + label_ +
                                  "' is only partially defined");
    const Eigen::Index d = dimension();
    return std::visit(
        [&](const auto& v) -> Matrix<Scalar> {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            return v.matrix;
          } else if constexpr (std::is_same_v<T, BasisMap>) {
            Matrix<Scalar> m = Matrix<Scalar>::Zero(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
              if (v.image[i] != kNoImage) m(v.image[i], i) = Scalar(1);
            return m;
          } else if constexpr (std::is_same_v<T, ScalarMul>) {
            return v.factor * Matrix<Scalar>::Identity(d, d);
          } else {
            Matrix<Scalar> m = Matrix<Scalar>::Zero(d, d);
            Eigen::Index off = 0;
            for (const auto& b : v.blocks) {
              const Eigen::Index bd = b.dimension();
              m.block(off, off, bd, bd) = b.to_matrix(allow_compression);
              off += bd;
            }
            return m;
          }
        },
        shape_);
  }

  /// The s x s corner P A P of the action's matrix, P = projection onto the
  /// first s coordinates.  Built directly, without materializing the full
  /// matrix, so large basis-map universes stay cheap.
  Matrix<Scalar> compression(Eigen::Index s) const {
    if (s < 1 || s > dimension())
      throw std::invalid_argument("UnitaryAction::compression: corner size out of range");
    return std::visit(
        [&](const auto& v) -> Matrix<Scalar> {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            return v.matrix.topLeftCorner(s, s);
          } else if constexpr (std::is_same_v<T, BasisMap>) {
            Matrix<Scalar> m = Matrix<Scalar>::Zero(s, s);
            for (Eigen::Index i = 0; i < s; ++i)
              if (v.image[i] != kNoImage && v.image[i] < s) m(v.image[i], i) = Scalar(1);
            return m;
          } else if constexpr (std::is_same_v<T, ScalarMul>) {
            return Matrix<Scalar>(v.factor * Matrix<Scalar>::Identity(s, s));
          } else {
            // Block-diagonal: the corner is the direct sum of block corners.
            Matrix<Scalar> m = Matrix<Scalar>::Zero(s, s);
            Eigen::Index off = 0;
            for (const auto& b : v.blocks) {
              const Eigen::Index bd = b.dimension();
              if (off >= s) break;
              const Eigen::Index take = std::min(bd, s - off);
              m.block(off, off, take, take) = b.compression(take);
              off += bd;
            }
            return m;
          }
        },
        shape_);
  }

 private:
  UnitaryAction(std::string label, std::variant<Dense, BasisMap, ScalarMul, DirectSum> shape)
      : label_(std::move(label)), shape_(std::move(shape)) {}

  Vector<Scalar> apply_unchecked(const Vector<Scalar>& x, bool inverse) const {
    return std::visit(
        [&](const auto& v) -> Vector<Scalar> {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            if (inverse) return v.matrix.adjoint() * x;
            return v.matrix * x;
          } else if constexpr (std::is_same_v<T, BasisMap>) {
            const Eigen::Index d = static_cast<Eigen::Index>(v.image.size());
            Vector<Scalar> y = Vector<Scalar>::Zero(d);
            if (!inverse) {
              for (Eigen::Index i = 0; i < d; ++i) {
                if (x[i] == Scalar(0)) continue;
                if (v.image[i] == kNoImage)
                  throw SupportViolationError(
                      "UnitaryAction: vector is supported outside the promised domain of '" +
                      label_ + "'");
                y[v.image[i]] = x[i];
              }
            } else {
              std::vector<bool> covered(d, false);
              for (Eigen::Index i = 0; i < d; ++i)
                if (v.image[i] != kNoImage) {
                  y[i] = x[v.image[i]];
                  covered[v.image[i]] = true;
                }
              for (Eigen::Index j = 0; j < d; ++j)
                if (!covered[j] && x[j] != Scalar(0))
                  throw SupportViolationError(
                      "UnitaryAction: vector is supported outside the promised range of '" +
                      label_ + "'");
            }
            return y;
          } else if constexpr (std::is_same_v<T, ScalarMul>) {
            if (inverse) return Vector<Scalar>(x / v.factor);
            return Vector<Scalar>(v.factor * x);
          } else {
            Vector<Scalar> y(x.size());
            Eigen::Index off = 0;
            for (const auto& b : v.blocks) {
              const Eigen::Index bd = b.dimension();
              y.segment(off, bd) =
                  inverse ? b.apply_inverse(Vector<Scalar>(x.segment(off, bd)))
                          : b.apply(Vector<Scalar>(x.segment(off, bd)));
              off += bd;
            }
            return y;
          }
        },
        shape_);
  }

  std::string label_;
  std::variant<Dense, BasisMap, ScalarMul, DirectSum> shape_;
};

/// Left translation by g on the span of a word ball:  delta_w -> delta_{gw},
/// defined where gw stays inside the universe.  Vectors supported on the ball
/// of radius R - |g| always stay inside.
template <typename Scalar = double>
UnitaryAction<Scalar> regular_action(const ReducedWord& g, const BallIndex& universe) {
  std::vector<Eigen::Index> image(universe.size(), UnitaryAction<Scalar>::kNoImage);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const std::size_t target = universe.find(g * universe.words()[i]);
    if (target != BallIndex::npos) image[i] = static_cast<Eigen::Index>(target);
  }
  return UnitaryAction<Scalar>::basis_permutation(g.str(), std::move(image));
}

/// Cyclic coordinate shift i -> i+1 (mod d).
template <typename Scalar = double>
UnitaryAction<Scalar> cyclic_shift_action(Eigen::Index d) {
  std::vector<Eigen::Index> image(d);
  for (Eigen::Index i = 0; i < d; ++i) image[i] = (i + 1) % d;
  return UnitaryAction<Scalar>::basis_permutation("shift", std::move(image));
}

/// Coordinate permutation delta_i -> delta_{p(i)}.
template <typename Scalar = double>
UnitaryAction<Scalar> permutation_action(std::string label, const Permutation& p) {
  std::vector<Eigen::Index> image(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) image[i] = static_cast<Eigen::Index>(p(i));
  return UnitaryAction<Scalar>::basis_permutation(std::move(label), std::move(image));
}

/// Masses a unit vector carries on three pairwise disjoint coordinate blocks:
/// (||p_{E1} x||, ||p_{E2} x||, ||p_{E3} x||).  Because the blocks are
/// disjoint, the squares sum to at most 1, so the smallest mass squared never
/// exceeds 1/3.
template <typename Scalar = double>
std::array<double, 3> leader_projection_mass(const std::vector<Eigen::Index>& e1,
                                             const std::vector<Eigen::Index>& e2,
                                             const std::vector<Eigen::Index>& e3,
                                             const UnitVector<Scalar>& x) {
  std::vector<bool> seen(x.dimension(), false);
  for (const auto* block : {&e1, &e2, &e3}) {
    for (Eigen::Index i : *block) {
      if (i < 0 || i >= x.dimension())
        throw std::invalid_argument("leader_projection_mass: index out of range");
      if (seen[i])
        throw std::invalid_argument("leader_projection_mass: blocks are not disjoint");
      seen[i] = true;
    }
  }
  return {std::sqrt(mask_norm_sq(e1, x)), std::sqrt(mask_norm_sq(e2, x)),
          std::sqrt(mask_norm_sq(e3, x))};
}

}  // namespace levylab
