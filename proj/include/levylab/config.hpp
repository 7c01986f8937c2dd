#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace levylab {

namespace detail {

inline std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace detail

/// Flat key = value experiment description.  Entries keep their insertion
/// order, keys are unique, and the text rendering parses back to an equal
/// object, so configurations survive a save/load round trip unchanged.
/// Values are free-form strings; typed accessors parse on demand
/// (locale-independent, and real-valued keys also accept fractions "p/q").
class ExperimentConfig {
 public:
  using Entry = std::pair<std::string, std::string>;

  ExperimentConfig() = default;

  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string_view stripped = detail::trim_view(line);
      if (stripped.empty() || stripped.front() == '#') continue;
      const auto sep = stripped.find('=');
      if (sep == std::string_view::npos)
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": expected key = value");
      const std::string_view key = detail::trim_view(stripped.substr(0, sep));
      const std::string_view value = detail::trim_view(stripped.substr(sep + 1));
      if (key.empty())
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
      if (c.has(std::string(key)))
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": duplicate key '" + std::string(key) + "'");
      c.entries_.emplace_back(std::string(key), std::string(value));
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
  }

  std::string to_string() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
      out += key;
      out += " = ";
      out += value;
      out += '\n';
    }
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("config: cannot write '" + path + "'");
    out << to_string();
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  const std::string& at(const std::string& key) const {
    if (const std::string* v = find(key)) return *v;
    throw std::invalid_argument("config: missing key '" + key + "'");
  }

  std::string get(const std::string& key, std::string fallback) const {
    if (const std::string* v = find(key)) return *v;
    return fallback;
  }

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(key, std::move(value));
  }

  long long get_int(const std::string& key) const { return parse_int(key, at(key)); }
  long long get_int(const std::string& key, long long fallback) const {
    const std::string* v = find(key);
    return v ? parse_int(key, *v) : fallback;
  }

  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const char* first = v->data();
    const char* last = first + v->size();
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc() || r.ptr != last)
      throw std::invalid_argument("config: key '" + key + "' is not a non-negative integer: '" +
                                  *v + "'");
    return out;
  }

  double get_real(const std::string& key) const { return parse_real(key, at(key)); }
  double get_real(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    return v ? parse_real(key, *v) : fallback;
  }

  bool operator==(const ExperimentConfig& other) const { return entries_ == other.entries_; }

 private:
  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  static long long parse_int(const std::string& key, const std::string& text) {
    long long out = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc() || r.ptr != last)
      throw std::invalid_argument("config: key '" + key + "' is not an integer: '" + text + "'");
    return out;
  }

  static double parse_real(const std::string& key, const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      const double num = parse_real(key, text.substr(0, slash));
      const double den = parse_real(key, text.substr(slash + 1));
      if (den == 0.0) throw std::invalid_argument("config: key '" + key + "' divides by zero");
      return num / den;
    }
    double out = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc() || r.ptr != last)
      throw std::invalid_argument("config: key '" + key + "' is not a number: '" + text + "'");
    return out;
  }

  std::vector<Entry> entries_;
};

}  // namespace levylab
