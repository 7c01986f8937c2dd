#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace levylab {

/// Exact nonnegative rational, reduced at construction.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  bool operator==(const Rational& rhs) const { return num == rhs.num && den == rhs.den; }
  bool operator!=(const Rational& rhs) const { return !(*this == rhs); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Permutation of {0, ..., n-1}, stored as the image list.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (std::size_t v : images_) {
      if (v >= images_.size() || seen[v])
        throw std::invalid_argument("Permutation: image list is not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> im(n);
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
  }

  /// Parses one-line image notation with 1-based entries: "2 1 4 3".
  static Permutation parse(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::size_t> im;
    long long v;
    while (in >> v) {
      if (v < 1) throw std::invalid_argument("Permutation::parse: entries are 1-based");
      im.push_back(static_cast<std::size_t>(v - 1));
    }
    if (!in.eof()) throw std::invalid_argument("Permutation::parse: non-numeric entry");
    if (im.empty()) throw std::invalid_argument("Permutation::parse: empty input");
    return Permutation(std::move(im));
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(images_[i] + 1);
    }
    return out;
  }

  std::size_t size() const { return images_.size(); }
  std::size_t operator()(std::size_t i) const { return images_.at(i); }
  const std::vector<std::size_t>& images() const { return images_; }

  /// Composition acting as (this o rhs)(i) = this(rhs(i)).
  Permutation operator*(const Permutation& rhs) const {
    if (size() != rhs.size()) throw std::invalid_argument("Permutation: size mismatch");
    std::vector<std::size_t> im(size());
    for (std::size_t i = 0; i < size(); ++i) im[i] = images_[rhs.images_[i]];
    return Permutation(std::move(im));
  }

  Permutation inverse() const {
    std::vector<std::size_t> im(size());
    for (std::size_t i = 0; i < size(); ++i) im[images_[i]] = i;
    return Permutation(std::move(im));
  }

  bool operator==(const Permutation& rhs) const { return images_ == rhs.images_; }
  bool operator!=(const Permutation& rhs) const { return images_ != rhs.images_; }

 private:
  std::vector<std::size_t> images_;
};

/// Number of points where the two permutations disagree.
inline std::size_t hamming(const Permutation& s, const Permutation& t) {
  if (s.size() != t.size()) throw std::invalid_argument("hamming: size mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s(i) != t(i)) ++d;
  return d;
}

/// Normalized Hamming distance
///   phi(s, t) = d(s, t) / max{d(s, id), d(t, id)},   phi(s, s) = 0,
/// computed exactly.  The denominator is positive whenever s != t.
inline Rational normalized_hamming(const Permutation& s, const Permutation& t) {
  if (s.size() != t.size()) throw std::invalid_argument("normalized_hamming: size mismatch");
  if (s == t) return Rational(0, 1);
  const Permutation id = Permutation::identity(s.size());
  const std::size_t d_st = hamming(s, t);
  const std::size_t d_s = hamming(s, id);
  const std::size_t d_t = hamming(t, id);
  const std::size_t denom = d_s > d_t ? d_s : d_t;
  return Rational(static_cast<long long>(d_st), static_cast<long long>(denom));
}

/// [2, 1, 4, 3, ..., n, n-1]: every adjacent pair swapped (n even).
inline Permutation pairwise_swap_all(std::size_t n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("pairwise_swap_all: n must be even and >= 2");
  std::vector<std::size_t> im(n);
  for (std::size_t i = 0; i < n; i += 2) {
    im[i] = i + 1;
    im[i + 1] = i;
  }
  return Permutation(std::move(im));
}

/// [1, 2, 4, 3, ..., n, n-1]: fixes the first pair, swaps the rest (n even).
inline Permutation pairwise_swap_tail(std::size_t n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("pairwise_swap_tail: n must be even and >= 4");
  std::vector<std::size_t> im(n);
  im[0] = 0;
  im[1] = 1;
  for (std::size_t i = 2; i < n; i += 2) {
    im[i] = i + 1;
    im[i + 1] = i;
  }
  return Permutation(std::move(im));
}

}  // namespace levylab
