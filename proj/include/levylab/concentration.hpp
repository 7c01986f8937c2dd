#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "levylab/common.hpp"
#include "levylab/parallel.hpp"
#include "levylab/spherical_set.hpp"

namespace levylab {

/// Monte Carlo estimate of the concentration behavior of one set:  the mass
/// of A, the mass of its geodesic eps-neighborhood, and the induced estimate
/// alpha_hat = 1 - mu(O_eps(A)).  alpha_hat only bounds the concentration
/// function when mu(A) >= 1/2; `below_half_measure` flags the other case.
struct AlphaEstimate {
  double set_measure = 0.0;
  double neighborhood_measure = 0.0;
  double alpha_hat = 0.0;
  double std_error = 0.0;  // binomial stderr of neighborhood_measure
  bool below_half_measure = false;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// empirical_alpha over the uniform measure of the (d-1)-sphere; eps is
/// geodesic, membership in O_eps(A) is decided through the set's chordal
/// distance evaluator (the two metrics are linked by a fixed monotone map).
template <typename Scalar = double>
AlphaEstimate empirical_alpha(const SphericalSet<Scalar>& a, Eigen::Index d, double eps,
                              std::size_t m, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("empirical_alpha: need d >= 2");
  if (eps < 0.0) throw std::invalid_argument("empirical_alpha: eps must be >= 0");
  if (m == 0) throw std::invalid_argument("empirical_alpha: sample count must be positive");
  if (a.dimension != d) throw std::invalid_argument("empirical_alpha: set dimension mismatch");
  const double chordal_eps = chordal_from_geodesic(eps);
  struct Counts {
    std::size_t in_set = 0;
    std::size_t in_nbhd = 0;
  };
  Counts c = parallel_map_reduce<Counts>(
      m, Counts{},
      [&](std::size_t first, std::size_t last) {
        Counts cc;
        for (std::size_t i = first; i < last; ++i) {
          RandomStream rng = RandomStream::for_sample(seed, i);
          const Vector<Scalar> x = unit_sphere_point<Scalar>(d, rng);
          if (a.member(x)) {
            ++cc.in_set;
            ++cc.in_nbhd;
          } else if (a.distance_upper(x) < chordal_eps) {
            ++cc.in_nbhd;
          }
        }
        return cc;
      },
      [](Counts x, Counts y) {
        x.in_set += y.in_set;
        x.in_nbhd += y.in_nbhd;
        return x;
      });
  AlphaEstimate out;
  out.samples = m;
  out.seed = seed;
  out.set_measure = static_cast<double>(c.in_set) / static_cast<double>(m);
  out.neighborhood_measure = static_cast<double>(c.in_nbhd) / static_cast<double>(m);
  out.alpha_hat = 1.0 - out.neighborhood_measure;
  out.std_error = std::sqrt(out.neighborhood_measure * (1.0 - out.neighborhood_measure) /
                            static_cast<double>(m));
  out.below_half_measure = out.set_measure < 0.5;
  return out;
}

enum class CurveProvenance { ExactCap, MonteCarlo, LevyBound };

inline std::string provenance_name(CurveProvenance p) {
  switch (p) {
    case CurveProvenance::ExactCap: return "exact-cap";
    case CurveProvenance::MonteCarlo: return "monte-carlo";
    case CurveProvenance::LevyBound: return "levy-bound";
  }
  throw std::invalid_argument("provenance_name: unknown value");
}

/// alpha values on an eps grid, tagged with how they were produced.
struct ConcentrationCurve {
  std::vector<double> epsilon;
  std::vector<double> alpha;
  CurveProvenance provenance = CurveProvenance::ExactCap;
  int n = 0;  // sphere dimension the curve refers to
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;

  void validate() const {
    if (epsilon.size() != alpha.size())
      throw std::invalid_argument("ConcentrationCurve: ragged columns");
    for (std::size_t i = 1; i < epsilon.size(); ++i) {
      if (epsilon[i] <= epsilon[i - 1])
        throw std::invalid_argument("ConcentrationCurve: eps grid not increasing");
      if (alpha[i] > alpha[i - 1] + 1e-9)
        throw std::invalid_argument("ConcentrationCurve: alpha not nonincreasing");
    }
    if (provenance == CurveProvenance::ExactCap)
      for (std::size_t i = 0; i < epsilon.size(); ++i)
        if (epsilon[i] == 0.0 && std::abs(alpha[i] - 0.5) > 1e-12)
          throw std::invalid_argument("ConcentrationCurve: exact curve must start at 1/2");
  }

  std::string to_csv() const {
    validate();
    std::string out = "epsilon,alpha,provenance,n,samples,seed\n";
    const std::string prov = provenance_name(provenance);
    const std::string samples_s = samples ? std::to_string(*samples) : std::string();
    const std::string seed_s = seed ? std::to_string(*seed) : std::string();
    for (std::size_t i = 0; i < epsilon.size(); ++i) {
      out += format_double(epsilon[i]);
      out += ',';
      out += format_double(alpha[i]);
      out += ',';
      out += prov;
      out += ',';
      out += std::to_string(n);
      out += ',';
      out += samples_s;
      out += ',';
      out += seed_s;
      out += '\n';
    }
    return out;
  }

  nlohmann::json to_json() const {
    validate();
    nlohmann::json j;
    j["epsilon"] = epsilon;
    j["alpha"] = alpha;
    j["provenance"] = provenance_name(provenance);
    j["n"] = n;
    if (samples) j["samples"] = *samples;
    if (seed) j["seed"] = *seed;
    return j;
  }

  static ConcentrationCurve from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "epsilon,alpha,provenance,n,samples,seed")
      throw std::invalid_argument("ConcentrationCurve: bad CSV header");
    ConcentrationCurve curve;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(row, field, ',')) fields.push_back(field);
      fields.resize(6);
      curve.epsilon.push_back(std::stod(fields[0]));
      curve.alpha.push_back(std::stod(fields[1]));
      if (first) {
        if (fields[2] == "exact-cap") curve.provenance = CurveProvenance::ExactCap;
        else if (fields[2] == "monte-carlo") curve.provenance = CurveProvenance::MonteCarlo;
        else if (fields[2] == "levy-bound") curve.provenance = CurveProvenance::LevyBound;
        else throw std::invalid_argument("ConcentrationCurve: unknown provenance");
        curve.n = std::stoi(fields[3]);
        if (!fields[4].empty()) curve.samples = std::stoull(fields[4]);
        if (!fields[5].empty()) curve.seed = std::stoull(fields[5]);
        first = false;
      }
    }
    curve.validate();
    return curve;
  }
};

/// Exact concentration curve of S^n on a uniform eps grid.
inline ConcentrationCurve exact_cap_curve(int n, double eps_max, std::size_t steps) {
  if (steps < 2) throw std::invalid_argument("exact_cap_curve: need at least two grid points");
  ConcentrationCurve c;
  c.provenance = CurveProvenance::ExactCap;
  c.n = n;
  for (std::size_t i = 0; i < steps; ++i) {
    const double eps = eps_max * static_cast<double>(i) / static_cast<double>(steps - 1);
    c.epsilon.push_back(eps);
    c.alpha.push_back(cap_alpha_exact(n, eps));
  }
  c.validate();
  return c;
}

inline ConcentrationCurve levy_bound_curve(int n, double eps_max, std::size_t steps) {
  if (steps < 2) throw std::invalid_argument("levy_bound_curve: need at least two grid points");
  ConcentrationCurve c;
  c.provenance = CurveProvenance::LevyBound;
  c.n = n;
  for (std::size_t i = 0; i < steps; ++i) {
    const double eps = eps_max * static_cast<double>(i) / static_cast<double>(steps - 1);
    c.epsilon.push_back(eps);
    c.alpha.push_back(levy_bound(n, eps));
  }
  c.validate();
  return c;
}

/// Monte Carlo curve for one set on S^(d-1); all grid points reuse the same
/// sample set, which also makes alpha_hat nonincreasing by construction.
template <typename Scalar = double>
ConcentrationCurve empirical_curve(const SphericalSet<Scalar>& a, Eigen::Index d, double eps_max,
                                   std::size_t steps, std::size_t m, std::uint64_t seed) {
  if (steps < 2) throw std::invalid_argument("empirical_curve: need at least two grid points");
  std::vector<double> eps_grid(steps);
  for (std::size_t i = 0; i < steps; ++i)
    eps_grid[i] = eps_max * static_cast<double>(i) / static_cast<double>(steps - 1);
  // Histogram the chordal distances once, then sweep the grid.
  std::vector<double> dists(m);
  parallel_for(m, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_sample(seed, i);
    const Vector<Scalar> x = unit_sphere_point<Scalar>(d, rng);
    dists[i] = a.member(x) ? 0.0 : a.distance_upper(x);
  });
  ConcentrationCurve c;
  c.provenance = CurveProvenance::MonteCarlo;
  c.n = static_cast<int>(d) - 1;
  c.samples = m;
  c.seed = seed;
  for (double eps : eps_grid) {
    const double chordal_eps = chordal_from_geodesic(eps);
    std::size_t hits = 0;
    for (double dist : dists)
      if (dist == 0.0 || dist < chordal_eps) ++hits;
    c.epsilon.push_back(eps);
    c.alpha.push_back(1.0 - static_cast<double>(hits) / static_cast<double>(m));
  }
  c.validate();
  return c;
}

}  // namespace levylab
