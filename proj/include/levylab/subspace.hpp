#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "levylab/common.hpp"
#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"
#include "levylab/sphere.hpp"

namespace levylab {

/// d x n matrix with orthonormal columns; the frame of a rank-n projection
/// P = F F^H.  Construction verifies the Gram matrix.
template <typename Scalar = double>
class Frame {
 public:
  explicit Frame(Matrix<Scalar> cols) : cols_(std::move(cols)) {
    if (cols_.rows() == 0 || cols_.cols() == 0)
      throw std::invalid_argument("Frame: empty matrix");
    if (cols_.cols() > cols_.rows())
      throw std::invalid_argument("Frame: more columns than ambient dimension");
    const Matrix<Scalar> gram = cols_.adjoint() * cols_;
    const double err = (gram - Matrix<Scalar>::Identity(cols_.cols(), cols_.cols()))
                           .cwiseAbs()
                           .maxCoeff();
    if (err > kFrameGramTol)
      throw std::invalid_argument("Frame: columns are not orthonormal within tolerance");
  }

  const Matrix<Scalar>& columns() const { return cols_; }
  Eigen::Index ambient_dimension() const { return cols_.rows(); }
  Eigen::Index rank() const { return cols_.cols(); }

  Matrix<Scalar> projection() const { return cols_ * cols_.adjoint(); }

  // Frame of the coordinate subspace spanned by the listed axes.
  static Frame coordinate(Eigen::Index d, const std::vector<Eigen::Index>& axes) {
    Matrix<Scalar> m = Matrix<Scalar>::Zero(d, static_cast<Eigen::Index>(axes.size()));
    for (std::size_t j = 0; j < axes.size(); ++j) {
      if (axes[j] < 0 || axes[j] >= d)
        throw std::invalid_argument("Frame::coordinate: axis out of range");
      m(axes[j], static_cast<Eigen::Index>(j)) = Scalar(1);
    }
    return Frame(std::move(m));
  }

 private:
  Matrix<Scalar> cols_;
};

/// Modified Gram-Schmidt with one reorthogonalization pass.  A column whose
/// residual collapses below 1e-8 of its original norm is reported by index.
template <typename Scalar = double>
Frame<Scalar> orthonormalize(const Matrix<Scalar>& vectors) {
  if (vectors.rows() == 0 || vectors.cols() == 0)
    throw std::invalid_argument("orthonormalize: empty input");
  Matrix<Scalar> q = vectors;
  const Eigen::Index n = q.cols();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double original = vectors.col(k).norm();
    if (!(original > 0.0))
      throw RankDeficientError("orthonormalize: column " + std::to_string(k) + " is zero");
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const Scalar c = q.col(j).dot(q.col(k));
        q.col(k) -= c * q.col(j);
      }
    }
    const double residual = q.col(k).norm();
    if (residual <= 1e-8 * original)
      throw RankDeficientError("orthonormalize: column " + std::to_string(k) +
                               " is linearly dependent on its predecessors");
    q.col(k) /= residual;
  }
  return Frame<Scalar>(std::move(q));
}

/// Sum of singular values of P1 - P2; the difference is Hermitian, so this is
/// the sum of |eigenvalues|.
template <typename Scalar = double>
double trace_distance(const Frame<Scalar>& f1, const Frame<Scalar>& f2) {
  if (f1.ambient_dimension() != f2.ambient_dimension())
    throw std::invalid_argument("trace_distance: ambient dimension mismatch");
  const Matrix<Scalar> diff = f1.projection() - f2.projection();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// Principal angles between two equal-rank subspaces together with the
/// matched orthonormal directions:
///   left[i] in range(P1), right[i] in range(P2), <left[i], right[i]> = cos(theta_i),
///   and the i-th pair is orthogonal to the j-th pair for i != j.
/// pair_vector[i] is the normalized bisector (left[i] + right[i]) / |...|.
template <typename Scalar = double>
struct PrincipalAngleDecomposition {
  std::vector<double> angles;     // nondecreasing, in [0, pi/2]
  Matrix<Scalar> left;            // d x n
  Matrix<Scalar> right;           // d x n
  Matrix<Scalar> pair_vectors;    // d x n

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["angles"] = angles;
    std::vector<double> residuals;
    for (std::size_t i = 0; i < angles.size(); ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(i);
      const double observed =
          real_part(Scalar(right.col(k).dot(left.col(k))));
      residuals.push_back(std::abs(observed - std::cos(angles[i])));
    }
    j["residuals"] = residuals;
    return j;
  }
};

template <typename Scalar = double>
PrincipalAngleDecomposition<Scalar> principal_angles(const Frame<Scalar>& f1,
                                                     const Frame<Scalar>& f2) {
  if (f1.ambient_dimension() != f2.ambient_dimension())
    throw std::invalid_argument("principal_angles: ambient dimension mismatch");
  if (f1.rank() != f2.rank())
    throw std::invalid_argument("principal_angles: rank mismatch");
  const Matrix<Scalar> overlap = f1.columns().adjoint() * f2.columns();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PrincipalAngleDecomposition<Scalar> out;
  const Eigen::Index n = f1.rank();
  out.left = f1.columns() * svd.matrixU();
  out.right = f2.columns() * svd.matrixV();
  out.pair_vectors.resize(f1.ambient_dimension(), n);
  out.angles.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double cosine = clamp_unit(svd.singularValues()(i));
    out.angles[i] = std::acos(cosine);
    // <left_i, right_i> = sigma_i >= 0, so the bisector never degenerates.
    Vector<Scalar> bisector = out.left.col(i) + out.right.col(i);
    out.pair_vectors.col(i) = bisector / bisector.norm();
  }
  return out;
}

/// The two aligned orthonormal families (e1^i) and (e2^i): unit vectors of
/// P1 x_i and P2 x_i for the i-th pair vector x_i.  With the SVD-matched
/// directions these are exactly the left/right families.
template <typename Scalar = double>
std::pair<Frame<Scalar>, Frame<Scalar>> aligned_frames(const Frame<Scalar>& f1,
                                                       const Frame<Scalar>& f2) {
  auto dec = principal_angles(f1, f2);
  return {Frame<Scalar>(std::move(dec.left)), Frame<Scalar>(std::move(dec.right))};
}

/// Partial isometry r : range(P1) -> range(P2) mapping e1^i to e2^i.  On its
/// domain it satisfies  ||r(x) - x|| <= sqrt(2) * dist(x, range(P2)).
template <typename Scalar = double>
class IsometryMap {
 public:
  IsometryMap(Frame<Scalar> domain, Frame<Scalar> codomain, Matrix<Scalar> coeffs)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), coeffs_(std::move(coeffs)) {}

  /// Applies r to x in range(P1) (x is projected onto the domain first).
  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    return codomain_.columns() * (coeffs_ * (domain_.columns().adjoint() * x));
  }

  const Frame<Scalar>& domain() const { return domain_; }
  const Frame<Scalar>& codomain() const { return codomain_; }
  /// Matrix of r in the domain/codomain frames; unitary.
  const Matrix<Scalar>& coefficients() const { return coeffs_; }

 private:
  Frame<Scalar> domain_;
  Frame<Scalar> codomain_;
  Matrix<Scalar> coeffs_;
};

template <typename Scalar = double>
IsometryMap<Scalar> build_isometry(const Frame<Scalar>& f1, const Frame<Scalar>& f2) {
  if (f1.ambient_dimension() != f2.ambient_dimension())
    throw std::invalid_argument("build_isometry: ambient dimension mismatch");
  if (f1.rank() != f2.rank())
    throw std::invalid_argument("build_isometry: rank mismatch");
  const Matrix<Scalar> overlap = f1.columns().adjoint() * f2.columns();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // r(F1 U a) = F2 V a, i.e. the frame-coordinate matrix is V U^H.
  const Matrix<Scalar> coeffs = svd.matrixV() * svd.matrixU().adjoint();
  return IsometryMap<Scalar>(f1, f2, coeffs);
}

/// Fraction of the uniform measure of the sub-sphere S1 = S cap range(P1)
/// lying within chordal distance eps of range(P2), with the Gaussian
/// reference bound 1 - sqrt(pi/8) exp(-eps^2 n / 8) reported for comparison
/// (the bound is not asserted; it can fail its own side condition).
struct ProximityMass {
  double estimate = 0.0;
  double std_error = 0.0;
  double reference_bound = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

template <typename Scalar = double>
ProximityMass proximity_mass(const Frame<Scalar>& f1, const Frame<Scalar>& f2, double eps,
                             std::size_t m, std::uint64_t seed) {
  if (f1.ambient_dimension() != f2.ambient_dimension())
    throw std::invalid_argument("proximity_mass: ambient dimension mismatch");
  if (eps < 0.0) throw std::invalid_argument("proximity_mass: eps must be >= 0");
  if (m == 0) throw std::invalid_argument("proximity_mass: sample count must be positive");
  const Matrix<Scalar> p2 = f2.projection();
  const std::size_t hits = parallel_count(m, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_sample(seed, i);
    const Vector<Scalar> c = unit_sphere_point<Scalar>(f1.rank(), rng);
    const Vector<Scalar> x = f1.columns() * c;
    return (x - p2 * x).norm() < eps;
  });
  ProximityMass out;
  out.samples = m;
  out.seed = seed;
  out.estimate = static_cast<double>(hits) / static_cast<double>(m);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(m));
  const double n = static_cast<double>(f1.rank());
  out.reference_bound =
      1.0 - std::sqrt(std::atan(1.0) / 2.0) * std::exp(-eps * eps * n / 8.0);
  return out;
}

/// Haar-distributed random unitary: QR of a Gaussian matrix with the phases
/// of R's diagonal absorbed into Q.
template <typename Scalar = double>
Matrix<Scalar> haar_unitary(Eigen::Index d, std::uint64_t seed) {
  RandomStream rng = RandomStream::for_sample(seed, 0x51bb);
  Matrix<Scalar> g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) g.col(j) = gaussian_vector<Scalar>(d, rng);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
  Matrix<Scalar> q = qr.householderQ();
  const Matrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Scalar rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / Scalar(mag);
  }
  return q;
}

/// Uniformly random frame: first n columns of a Haar unitary.
template <typename Scalar = double>
Frame<Scalar> random_frame(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  if (n < 1 || n > d) throw std::invalid_argument("random_frame: need 1 <= n <= d");
  RandomStream rng = RandomStream::for_sample(seed, 0xf7a3e);
  Matrix<Scalar> g(d, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian_vector<Scalar>(d, rng);
  return orthonormalize(g);
}

/// Column-major CSV with a one-line `d,n,field` header.  Complex entries are
/// written as a real/imaginary value pair, doubling the values per line.
template <typename Scalar = double>
std::string frame_to_csv(const Frame<Scalar>& f) {
  std::string out = std::to_string(f.ambient_dimension()) + "," + std::to_string(f.rank()) +
                    "," + (is_complex_v<Scalar> ? "complex" : "real") + "\n";
  for (Eigen::Index j = 0; j < f.rank(); ++j) {
    for (Eigen::Index i = 0; i < f.ambient_dimension(); ++i) {
      if (i > 0) out += ',';
      if constexpr (is_complex_v<Scalar>) {
        out += format_double(std::real(f.columns()(i, j)));
        out += ',';
        out += format_double(std::imag(f.columns()(i, j)));
      } else {
        out += format_double(f.columns()(i, j));
      }
    }
    out += '\n';
  }
  return out;
}

template <typename Scalar = double>
Frame<Scalar> frame_from_csv(const std::string& text) {
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw std::invalid_argument("frame_from_csv: missing header");
  const std::string header = text.substr(0, pos);
  Eigen::Index d = 0, n = 0;
  char field[16] = {0};
  if (std::sscanf(header.c_str(), "%ld,%ld,%15s", &d, &n, field) != 3)
    throw std::invalid_argument("frame_from_csv: bad header");
  const std::string field_s(field);
  if ((field_s == "complex") != is_complex_v<Scalar>)
    throw std::invalid_argument("frame_from_csv: scalar field mismatch");
  Matrix<Scalar> m(d, n);
  std::istringstream in(text.substr(pos + 1));
  std::string line;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::getline(in, line)) throw std::invalid_argument("frame_from_csv: truncated");
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index i = 0; i < d; ++i) {
      if constexpr (is_complex_v<Scalar>) {
        std::string cell2;
        if (!std::getline(row, cell, ',') || !std::getline(row, cell2, ','))
          throw std::invalid_argument("frame_from_csv: short row");
        m(i, j) = Scalar(std::stod(cell), std::stod(cell2));
      } else {
        if (!std::getline(row, cell, ','))
          throw std::invalid_argument("frame_from_csv: short row");
        m(i, j) = std::stod(cell);
      }
    }
  }
  return Frame<Scalar>(std::move(m));
}

}  // namespace levylab
