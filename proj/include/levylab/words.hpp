#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "levylab/common.hpp"

namespace levylab {

// Letters of the free group on two generators, in enumeration order.
// 'a' < 'A' < 'b' < 'B', with capitals denoting inverses.
enum class Letter : std::uint8_t { a = 0, A = 1, b = 2, B = 3 };

inline Letter letter_inverse(Letter l) {
  switch (l) {
    case Letter::a: return Letter::A;
    case Letter::A: return Letter::a;
    case Letter::b: return Letter::B;
    case Letter::B: return Letter::b;
  }
  throw std::invalid_argument("letter_inverse: bad letter");
}

inline char letter_char(Letter l) { return "aAbB"[static_cast<int>(l)]; }

/// A reduced word over {a, a^-1, b, b^-1}; the empty word is the identity.
class ReducedWord {
 public:
  ReducedWord() = default;

  static ReducedWord parse(const std::string& text) {
    if (text == "e" || text.empty()) return ReducedWord();
    ReducedWord w;
    w.letters_.reserve(text.size());
    for (char c : text) {
      Letter l;
      switch (c) {
        case 'a': l = Letter::a; break;
        case 'A': l = Letter::A; break;
        case 'b': l = Letter::b; break;
        case 'B': l = Letter::B; break;
        default: throw std::invalid_argument("ReducedWord::parse: bad letter in input");
      }
      if (!w.letters_.empty() && w.letters_.back() == letter_inverse(l))
        throw std::invalid_argument("ReducedWord::parse: input is not reduced");
      w.letters_.push_back(l);
    }
    return w;
  }

  static ReducedWord generator(Letter l) {
    ReducedWord w;
    w.letters_.push_back(l);
    return w;
  }

  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }
  const std::vector<Letter>& letters() const { return letters_; }

  std::string str() const {
    if (letters_.empty()) return "e";
    std::string s;
    s.reserve(letters_.size());
    for (Letter l : letters_) s.push_back(letter_char(l));
    return s;
  }

  /// Concatenation with cancellation at the seam.
  ReducedWord operator*(const ReducedWord& rhs) const {
    ReducedWord out;
    out.letters_ = letters_;
    for (Letter l : rhs.letters_) {
      if (!out.letters_.empty() && out.letters_.back() == letter_inverse(l))
        out.letters_.pop_back();
      else
        out.letters_.push_back(l);
    }
    return out;
  }

  ReducedWord inverse() const {
    ReducedWord out;
    out.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
      out.letters_.push_back(letter_inverse(*it));
    return out;
  }

  bool operator==(const ReducedWord& rhs) const { return letters_ == rhs.letters_; }
  bool operator!=(const ReducedWord& rhs) const { return letters_ != rhs.letters_; }

  /// Ball order: by length, then lexicographic in a < a^-1 < b < b^-1.
  bool operator<(const ReducedWord& rhs) const {
    if (letters_.size() != rhs.letters_.size()) return letters_.size() < rhs.letters_.size();
    return letters_ < rhs.letters_;
  }

  /// Signed length of the maximal initial run of a or a^-1 (0 for the
  /// identity and for words starting with b^(+-1)).
  long prefix_class() const {
    if (letters_.empty()) return 0;
    if (letters_.front() == Letter::a) {
      long n = 0;
      for (Letter l : letters_) {
        if (l != Letter::a) break;
        ++n;
      }
      return n;
    }
    if (letters_.front() == Letter::A) {
      long n = 0;
      for (Letter l : letters_) {
        if (l != Letter::A) break;
        --n;
      }
      return n;
    }
    return 0;
  }

 private:
  std::vector<Letter> letters_;
};

inline ReducedWord word_a() { return ReducedWord::generator(Letter::a); }
inline ReducedWord word_b() { return ReducedWord::generator(Letter::b); }

/// a^n for any sign of n.
inline ReducedWord word_a_power(long n) {
  ReducedWord w;
  const Letter l = n >= 0 ? Letter::a : Letter::A;
  const long count = n >= 0 ? n : -n;
  for (long i = 0; i < count; ++i) w = w * ReducedWord::generator(l);
  return w;
}

inline constexpr std::size_t kDefaultBallRadiusLimit = 10;

/// Number of reduced words of length <= radius: 2 * 3^radius - 1.
inline std::size_t ball_size(std::size_t radius) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < radius; ++i) p *= 3;
  return 2 * p - 1;
}

/// All reduced words of length <= radius in the deterministic ball order:
/// the identity first, then by length, lexicographic within a length.
inline std::vector<ReducedWord> ball_enumerate(std::size_t radius,
                                               std::size_t radius_limit = kDefaultBallRadiusLimit) {
  if (radius > radius_limit)
    throw ResourceLimitError("ball_enumerate: radius " + std::to_string(radius) +
                             " exceeds limit " + std::to_string(radius_limit));
  std::vector<ReducedWord> ball;
  ball.reserve(ball_size(radius));
  ball.emplace_back();
  std::size_t level_begin = 0;
  for (std::size_t len = 1; len <= radius; ++len) {
    const std::size_t level_end = ball.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (Letter l : {Letter::a, Letter::A, Letter::b, Letter::B}) {
        const auto& w = ball[i].letters();
        if (!w.empty() && w.back() == letter_inverse(l)) continue;
        ball.push_back(ball[i] * ReducedWord::generator(l));
      }
    }
    level_begin = level_end;
  }
  // Extension preserves length-major order; sort each level for the
  // lexicographic tie-break.
  std::sort(ball.begin(), ball.end());
  return ball;
}

/// Word -> position in the ball order (the inverse of ball_enumerate).
class BallIndex {
 public:
  explicit BallIndex(std::vector<ReducedWord> ball) : ball_(std::move(ball)) {
    for (std::size_t i = 0; i < ball_.size(); ++i) index_.emplace(ball_[i].str(), i);
  }

  explicit BallIndex(std::size_t radius) : BallIndex(ball_enumerate(radius)) {}

  const std::vector<ReducedWord>& words() const { return ball_; }
  std::size_t size() const { return ball_.size(); }

  /// Index of w, or npos when w lies outside the ball.
  std::size_t find(const ReducedWord& w) const {
    auto it = index_.find(w.str());
    return it == index_.end() ? npos : it->second;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<ReducedWord> ball_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Indices (in ball order) of the prefix class W_n inside the ball:  words
/// whose maximal initial a-run has signed length n.
inline std::vector<Eigen::Index> prefix_class_indices(const BallIndex& ball, long n) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (ball.words()[i].prefix_class() == n) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace levylab
