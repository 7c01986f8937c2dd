#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace levylab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RealVector = Vector<double>;
using RealMatrix = Matrix<double>;
using ComplexVector = Vector<std::complex<double>>;
using ComplexMatrix = Matrix<std::complex<double>>;

template <typename Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, typename Eigen::NumTraits<Scalar>::Real>;

inline constexpr double kPi = 3.14159265358979323846;

// Unit vectors are accepted when their norm sits within this window of 1.
inline constexpr double kUnitNormTol = 1e-12;
// Frames are accepted when their Gram matrix sits within this window of the identity.
inline constexpr double kFrameGramTol = 1e-10;

// Thrown when a vector family fails the linear-independence precondition.
class RankDeficientError : public std::runtime_error {
 public:
  explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a search or enumeration would exceed its configured budget.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a partially defined basis map is applied outside its promised support.
class SupportViolationError : public std::runtime_error {
 public:
  explicit SupportViolationError(const std::string& what) : std::runtime_error(what) {}
};

inline double clamp_unit(double t) { return t < -1.0 ? -1.0 : (t > 1.0 ? 1.0 : t); }

template <typename Scalar>
double real_part(const Scalar& z) {
  if constexpr (is_complex_v<Scalar>) {
    return std::real(z);
  } else {
    return static_cast<double>(z);
  }
}

// Locale-independent shortest-round-trip formatting, used by every serializer
// so that identical runs produce byte-identical artifacts.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_double_fixed(double x, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

// Minimal JSON string escaping for serializer output.
inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// FNV-1a, used to derive independent deterministic seed streams from labels.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace levylab
