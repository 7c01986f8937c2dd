#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "levylab/action.hpp"
#include "levylab/common.hpp"
#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"
#include "levylab/sphere.hpp"
#include "levylab/spherical_set.hpp"
#include "levylab/words.hpp"

namespace levylab {

// ---------------------------------------------------------------------------
// Reports

enum class Verdict { WitnessFound, CertificateEmpty, Inconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::WitnessFound: return "witness-found";
    case Verdict::CertificateEmpty: return "certificate-empty";
    case Verdict::Inconclusive: return "inconclusive";
  }
  throw std::logic_error("verdict_name: unreachable");
}

namespace detail {

template <typename Scalar>
std::string vector_to_json(const Vector<Scalar>& x) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) out += ",";
    if constexpr (is_complex_v<Scalar>) {
      out += "[" + format_double(std::real(x[i])) + "," + format_double(std::imag(x[i])) + "]";
    } else {
      out += format_double(static_cast<double>(x[i]));
    }
  }
  return out + "]";
}

}  // namespace detail

/// Outcome of probing whether the eps-neighborhoods of a family of transformed
/// sets share a point.  A witness is a concrete point within eps of every set;
/// a certificate is an analytic argument that no such point exists;
/// inconclusive means the sampling budget ran out without either.  The margin
/// is the smallest observed value of max_i dist(x, set_i), so margin < eps
/// would have been a witness.
template <typename Scalar = double>
struct EssentialityReport {
  std::string label;
  std::vector<std::string> transforms;
  double epsilon = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Vector<Scalar>> witness;
  std::string certificate;  // non-empty exactly when verdict is certificate-empty
  double margin = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  std::string to_json() const {
    std::string out = "{";
    out += "\"label\":\"" + json_escape(label) + "\",";
    out += "\"transforms\":[";
    for (std::size_t i = 0; i < transforms.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(transforms[i]) + "\"";
    }
    out += "],";
    out += "\"epsilon\":" + format_double(epsilon) + ",";
    out += "\"verdict\":\"" + verdict_name(verdict) + "\",";
    if (witness) out += "\"witness\":" + detail::vector_to_json(*witness) + ",";
    if (!certificate.empty()) out += "\"certificate\":\"" + json_escape(certificate) + "\",";
    if (std::isfinite(margin)) out += "\"margin\":" + format_double(margin) + ",";
    out += "\"samples\":" + std::to_string(samples) + ",";
    out += "\"seed\":" + std::to_string(seed);
    return out + "}";
  }
};

/// A set together with finitely many transformed copies of it, with the
/// transformations recorded only through their labels.  This is how families
/// are described when the transformations exist at the set level but admit no
/// honest finite-dimensional unitary (coordinate masks of different sizes).
template <typename Scalar = double>
struct SymbolicFamily {
  std::string set_label;
  std::vector<std::string> transform_labels;
  std::vector<SphericalSet<Scalar>> transformed;
};

// ---------------------------------------------------------------------------
// Transformed sets

/// The image set g(A) of an invertible norm-preserving action, carried by
/// pullback: x is in g(A) iff g^{-1} x is in A, and dist(x, g(A)) =
/// dist(g^{-1} x, A).
template <typename Scalar>
SphericalSet<Scalar> transformed_set(const UnitaryAction<Scalar>& g,
                                     const SphericalSet<Scalar>& a) {
  if (g.is_partial())
    throw std::invalid_argument("transformed_set: transform '" + g.label() +
                                "' is not invertible on the whole space");
  if (g.dimension() != a.dimension)
    throw std::invalid_argument("transformed_set: dimension mismatch");
  SphericalSet<Scalar> s;
  s.label = g.label() + "(" + a.label + ")";
  s.dimension = a.dimension;
  s.member = [g, inner = a.member](const Vector<Scalar>& x) { return inner(g.apply_inverse(x)); };
  if (a.chordal_distance)
    s.chordal_distance = [g, inner = a.chordal_distance](const Vector<Scalar>& x) {
      return inner(g.apply_inverse(x));
    };
  if (a.witness_cloud) {
    auto cloud = std::make_shared<std::vector<Vector<Scalar>>>();
    cloud->reserve(a.witness_cloud->size());
    for (const auto& c : *a.witness_cloud) cloud->push_back(g.apply(c));
    s.witness_cloud = std::move(cloud);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Witness search

namespace detail {

inline constexpr std::size_t kRefinementRounds = 5;
inline constexpr double kInitialCapRadius = kPi / 8.0;  // geodesic

template <typename Scalar>
struct SearchCandidate {
  double score = std::numeric_limits<double>::infinity();
  std::size_t order = std::numeric_limits<std::size_t>::max();
  Vector<Scalar> point;

  bool better_than(const SearchCandidate& o) const {
    if (score != o.score) return score < o.score;
    return order < o.order;
  }
};

template <typename Scalar>
struct SearchPhaseResult {
  SearchCandidate<Scalar> best;                 // lowest score seen
  std::optional<SearchCandidate<Scalar>> hit;   // lowest-order point scoring < eps
};

template <typename Scalar, typename Sampler>
SearchPhaseResult<Scalar> search_phase(const std::vector<SphericalSet<Scalar>>& sets, double eps,
                                       std::size_t count, Sampler&& sample_point) {
  using Result = SearchPhaseResult<Scalar>;
  auto block = [&](std::size_t first, std::size_t last) {
    Result r;
    for (std::size_t i = first; i < last; ++i) {
      Vector<Scalar> x = sample_point(i);
      double score = 0.0;
      for (const auto& s : sets) score = std::max(score, s.distance_upper(x));
      SearchCandidate<Scalar> cand{score, i, std::move(x)};
      if (score < eps && (!r.hit || cand.order < r.hit->order) ) {
        r.hit = cand;
      }
      if (cand.better_than(r.best)) r.best = std::move(cand);
    }
    return r;
  };
  auto merge = [](Result into, Result part) {
    if (part.best.better_than(into.best)) into.best = std::move(part.best);
    if (part.hit && (!into.hit || part.hit->order < into.hit->order))
      into.hit = std::move(part.hit);
    return into;
  };
  return parallel_map_reduce<Result>(count, Result{}, block, merge);
}

/// Samples a point of the cap of geodesic radius `radius` around `center`,
/// biased toward the center (uniform in angle, uniform on the angular shell).
template <typename Scalar>
Vector<Scalar> cap_point(const Vector<Scalar>& center, double radius, RandomStream& rng) {
  const Eigen::Index d = center.size();
  if (d == 1) return center;
  Vector<Scalar> w;
  for (int tries = 0; tries < 64; ++tries) {
    w = gaussian_vector<Scalar>(d, rng);
    w -= center * center.dot(w);
    const double n = w.norm();
    if (n > 1e-12) {
      w /= n;
      break;
    }
    if (tries == 63) return center;
  }
  const double theta = radius * rng.next_unit();
  Vector<Scalar> y = std::cos(theta) * center + std::sin(theta) * w;
  const double n = y.norm();
  return Vector<Scalar>(y / n);
}

}  // namespace detail

/// Searches for a point lying within eps (chordal) of every set in the family:
/// a uniform-sampling pass over half the budget, then rounds of resampling in
/// shrinking caps around the best near-miss.  Sets without an exact distance
/// evaluator get a sampled witness cloud, whose distances are upper bounds --
/// sound for confirming a witness, never for claiming emptiness.  The verdict
/// is witness-found or inconclusive; certificate-empty is attached only by
/// callers holding an analytic certificate.
template <typename Scalar = double>
EssentialityReport<Scalar> witness_search_over_sets(std::string label,
                                                    std::vector<std::string> transform_labels,
                                                    std::vector<SphericalSet<Scalar>> sets,
                                                    double eps, Eigen::Index d,
                                                    std::size_t budget, std::uint64_t seed) {
  if (sets.empty()) throw std::invalid_argument("witness_search: empty family");
  if (!(eps > 0.0)) throw std::invalid_argument("witness_search: eps must be positive");
  for (const auto& s : sets)
    if (s.dimension != d) throw std::invalid_argument("witness_search: dimension mismatch");

  for (auto& s : sets) {
    if (!s.has_exact_distance() && (!s.witness_cloud || s.witness_cloud->empty())) {
      const std::size_t attempts = std::min<std::size_t>(50000, std::max<std::size_t>(5000, budget / 8));
      s.build_witness_cloud(attempts, seed ^ fnv1a(s.label) ^ 0xC10Dull, 5000);
    }
  }

  EssentialityReport<Scalar> report;
  report.label = std::move(label);
  report.transforms = std::move(transform_labels);
  report.epsilon = eps;
  report.seed = seed;

  const std::size_t uniform_count = budget / 2;
  auto uniform = detail::search_phase<Scalar>(sets, eps, uniform_count, [&](std::size_t i) {
    RandomStream rng = RandomStream::for_sample(seed, i);
    return unit_sphere_point<Scalar>(d, rng);
  });
  report.samples = uniform_count;
  detail::SearchCandidate<Scalar> best = uniform.best;
  std::optional<detail::SearchCandidate<Scalar>> hit = uniform.hit;

  if (!hit && uniform_count > 0 && best.point.size() == d) {
    const std::size_t per_round = (budget - uniform_count) / detail::kRefinementRounds;
    double radius = detail::kInitialCapRadius;
    for (std::size_t round = 1; round <= detail::kRefinementRounds && !hit; ++round) {
      const Vector<Scalar> center = best.point;
      const std::uint64_t round_seed = seed ^ (0xB000ull + round);
      auto refined = detail::search_phase<Scalar>(sets, eps, per_round, [&](std::size_t i) {
        RandomStream rng = RandomStream::for_sample(round_seed, i);
        return detail::cap_point<Scalar>(center, radius, rng);
      });
      report.samples += per_round;
      if (refined.best.better_than(best)) best = std::move(refined.best);
      if (refined.hit) hit = std::move(refined.hit);
      radius *= 0.5;
    }
  }

  if (hit) {
    // Recompute every distance from scratch; a failure here means the search
    // and the set definitions disagree, which is a bug, not a result.
    for (const auto& s : sets)
      if (!(s.distance_upper(hit->point) < eps))
        throw std::logic_error("witness_search: witness failed re-verification");
    report.verdict = Verdict::WitnessFound;
    report.witness = hit->point;
    report.margin = hit->score;
  } else {
    report.verdict = Verdict::Inconclusive;
    report.margin = best.score;
  }
  return report;
}

/// Witness search for { g(A) : g in transforms } with honest invertible
/// transforms realized by pullback.
template <typename Scalar = double>
EssentialityReport<Scalar> witness_search(const SphericalSet<Scalar>& a,
                                          const std::vector<UnitaryAction<Scalar>>& transforms,
                                          double eps, Eigen::Index d, std::size_t budget,
                                          std::uint64_t seed) {
  if (transforms.empty()) throw std::invalid_argument("witness_search: no transforms");
  std::vector<SphericalSet<Scalar>> sets;
  std::vector<std::string> labels;
  sets.reserve(transforms.size());
  for (const auto& g : transforms) {
    sets.push_back(transformed_set(g, a));
    labels.push_back(g.label());
  }
  return witness_search_over_sets<Scalar>(a.label, std::move(labels), std::move(sets), eps, d,
                                          budget, seed);
}

// ---------------------------------------------------------------------------
// Three-block mask experiment

/// The two-element cover by A = {||p_E x|| >= sqrt2/2} and its complement,
/// probed against three transformations carrying E onto disjoint blocks
/// E_1, E_2, E_3 (residue classes mod 3).  The transformed sets are
/// represented directly as mask-threshold sets: at a fixed truncation no
/// honest unitary maps E onto E_i, which is exactly why the family is
/// represented at the set level.  For eps below sqrt2/2 - sqrt3/3 both cover
/// elements receive an analytic emptiness certificate; a sampling search runs
/// regardless, as a falsification attempt.
template <typename Scalar = double>
std::array<EssentialityReport<Scalar>, 2> leader_experiment(Eigen::Index d, double eps,
                                                            std::size_t budget,
                                                            std::uint64_t seed) {
  if (d < 3 || d % 3 != 0)
    throw std::invalid_argument("leader_experiment: d must be a positive multiple of 3");
  if (!(eps > 0.0)) throw std::invalid_argument("leader_experiment: eps must be positive");

  const double c = std::sqrt(2.0) / 2.0;
  const double pigeonhole = std::sqrt(3.0) / 3.0;
  const double threshold = c - pigeonhole;

  std::vector<SphericalSet<Scalar>> sets;
  for (int j = 0; j < 3; ++j) {
    std::vector<Eigen::Index> mask;
    for (Eigen::Index i = j; i < d; i += 3) mask.push_back(i);
    sets.push_back(mask_threshold_set<Scalar>("{||p_E" + std::to_string(j + 1) + " x|| >= sqrt2/2}",
                                              d, std::move(mask), c, MaskSide::AtLeast));
  }

  const std::string certificate =
      "each O_eps lands in {||p_Ei x|| >= sqrt2/2 - eps = " + format_double(c - eps) +
      "}; disjoint blocks force min_i ||p_Ei x|| <= sqrt3/3 = " + format_double(pigeonhole) +
      "; eps = " + format_double(eps) + " < sqrt2/2 - sqrt3/3 = " + format_double(threshold) +
      ", so the three neighborhoods share no point";

  std::array<EssentialityReport<Scalar>, 2> out;
  const char* labels[2] = {"A", "B"};
  const char* sources[2] = {"E", "Ec"};
  for (int side = 0; side < 2; ++side) {
    std::vector<std::string> tlabels;
    for (int j = 1; j <= 3; ++j)
      tlabels.push_back(std::string(sources[side]) + "->E" + std::to_string(j));
    auto report = witness_search_over_sets<Scalar>(labels[side], std::move(tlabels), sets, eps, d,
                                                   budget, seed ^ (side ? 0xB0ull : 0x0Aull));
    if (eps < threshold) {
      if (report.verdict == Verdict::WitnessFound)
        throw std::logic_error("leader_experiment: witness contradicts the analytic certificate");
      report.verdict = Verdict::CertificateEmpty;
      report.certificate = certificate;
    }
    out[side] = std::move(report);
  }
  return out;
}

/// The cover {A, complement} used by the three-block experiment, for scans.
template <typename Scalar = double>
std::vector<SymbolicFamily<Scalar>> leader_families(Eigen::Index d) {
  if (d < 3 || d % 3 != 0)
    throw std::invalid_argument("leader_families: d must be a positive multiple of 3");
  const double c = std::sqrt(2.0) / 2.0;
  std::vector<SphericalSet<Scalar>> sets;
  for (int j = 0; j < 3; ++j) {
    std::vector<Eigen::Index> mask;
    for (Eigen::Index i = j; i < d; i += 3) mask.push_back(i);
    sets.push_back(mask_threshold_set<Scalar>("{||p_E" + std::to_string(j + 1) + " x|| >= sqrt2/2}",
                                              d, std::move(mask), c, MaskSide::AtLeast));
  }
  std::vector<SymbolicFamily<Scalar>> families(2);
  families[0].set_label = "A";
  families[1].set_label = "B";
  for (int side = 0; side < 2; ++side) {
    for (int j = 1; j <= 3; ++j)
      families[side].transform_labels.push_back(std::string(side ? "Ec" : "E") + "->E" +
                                                std::to_string(j));
    families[side].transformed = sets;
  }
  return families;
}

// ---------------------------------------------------------------------------
// Free-group mask experiment

/// Result of the free-group experiment over the ball truncation: reports for
/// the low-mass set A1 = {||chi_W0 f|| <= 1/3} against {e, b}, and the
/// high-mass set A2 = {||chi_W0 f|| >= 1/3} against k inverse-a shifts,
/// together with the empirical statistics backing the A1 certificate.
template <typename Scalar = double>
struct F2Experiment {
  EssentialityReport<Scalar> a1;
  EssentialityReport<Scalar> a2;
  std::size_t a1_samples = 0;
  std::size_t a1_violations = 0;   // samples with ||chi_W0 b f|| < 2/3 or dist < 1/3
  double a1_min_push_mass = std::numeric_limits<double>::infinity();
  double a1_min_distance = std::numeric_limits<double>::infinity();
};

template <typename Scalar = double>
F2Experiment<Scalar> f2_experiment(std::size_t radius, double eps, std::size_t k, std::size_t m,
                                   std::uint64_t seed) {
  if (radius < 3) throw std::invalid_argument("f2_experiment: radius must be at least 3");
  if (!(eps > 0.0)) throw std::invalid_argument("f2_experiment: eps must be positive");
  if (k < 1) throw std::invalid_argument("f2_experiment: k must be positive");

  const BallIndex universe(radius);
  const Eigen::Index n = static_cast<Eigen::Index>(universe.size());
  const std::vector<Eigen::Index> w0 = prefix_class_indices(universe, 0);
  const auto a1_set = mask_threshold_set<Scalar>("A1", n, w0, 1.0 / 3.0, MaskSide::AtMost);

  F2Experiment<Scalar> result;

  // --- A1 against {identity, b}.
  // For f in A1: left translation by b carries every word with a leading
  // a-run to a word with no leading a-run, so ||chi_W0 (b f)|| >=
  // ||f - chi_W0 f|| >= sqrt(1 - 1/9) = 2 sqrt2 / 3 > 2/3; the mask mass is
  // 1-Lipschitz, hence dist(b f, A1) >= 2/3 - 1/3 = 1/3, and the
  // eps-neighborhoods of A1 and b(A1) are disjoint whenever eps < 1/6.
  {
    // Empirical pass: sample f in A1 supported on the next-smaller ball so
    // that the translation stays inside the universe, and measure the push.
    std::vector<Eigen::Index> w0_small, rest_small;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      const ReducedWord& w = universe.words()[i];
      if (w.length() + 1 > radius) continue;
      (w.prefix_class() == 0 ? w0_small : rest_small).push_back(static_cast<Eigen::Index>(i));
    }
    const auto act_b = regular_action<Scalar>(word_b(), universe);

    struct Stats {
      std::size_t violations = 0;
      double min_mass = std::numeric_limits<double>::infinity();
      double min_dist = std::numeric_limits<double>::infinity();
    };
    auto block = [&](std::size_t first, std::size_t last) {
      Stats st;
      for (std::size_t i = first; i < last; ++i) {
        RandomStream rng = RandomStream::for_sample(seed, i);
        const double t = rng.next_unit() / 3.0;
        Vector<Scalar> f = Vector<Scalar>::Zero(n);
        Vector<Scalar> gw = gaussian_vector<Scalar>(static_cast<Eigen::Index>(w0_small.size()), rng);
        Vector<Scalar> gr = gaussian_vector<Scalar>(static_cast<Eigen::Index>(rest_small.size()), rng);
        const double nw = gw.norm();
        const double nr = gr.norm();
        if (nw <= 0.0 || nr <= 0.0) continue;
        for (std::size_t j = 0; j < w0_small.size(); ++j)
          f[w0_small[j]] = gw[static_cast<Eigen::Index>(j)] * (t / nw);
        const double tail = std::sqrt(std::max(0.0, 1.0 - t * t));
        for (std::size_t j = 0; j < rest_small.size(); ++j)
          f[rest_small[j]] = gr[static_cast<Eigen::Index>(j)] * (tail / nr);
        const Vector<Scalar> bf = act_b.apply(f);
        const double mass = std::sqrt(mask_norm_sq(w0, bf));
        const double dist = a1_set.chordal_distance(bf);
        if (mass < 2.0 / 3.0 - 1e-12 || dist < 1.0 / 3.0 - 1e-9) ++st.violations;
        st.min_mass = std::min(st.min_mass, mass);
        st.min_dist = std::min(st.min_dist, dist);
      }
      return st;
    };
    auto merge = [](Stats into, Stats part) {
      into.violations += part.violations;
      into.min_mass = std::min(into.min_mass, part.min_mass);
      into.min_dist = std::min(into.min_dist, part.min_dist);
      return into;
    };
    const Stats st = parallel_map_reduce<Stats>(m, Stats{}, block, merge);
    result.a1_samples = m;
    result.a1_violations = st.violations;
    result.a1_min_push_mass = st.min_mass;
    result.a1_min_distance = st.min_dist;

    EssentialityReport<Scalar>& rep = result.a1;
    rep.label = "A1";
    rep.transforms = {"e", "b"};
    rep.epsilon = eps;
    rep.samples = m;
    rep.seed = seed;
    rep.margin = st.min_dist;
    if (eps < 1.0 / 6.0) {
      rep.verdict = Verdict::CertificateEmpty;
      rep.certificate =
          "for every f in A1, ||chi_W0 (b f)|| >= ||f - chi_W0 f|| >= 2*sqrt2/3 > 2/3; the mask "
          "mass is 1-Lipschitz, so dist(b f, A1) >= 2/3 - 1/3 = 1/3 and the eps-neighborhoods of "
          "A1 and b(A1) are disjoint for eps = " +
          format_double(eps) + " < 1/6";
    } else {
      rep.verdict = Verdict::Inconclusive;
    }
  }

  // --- A2 against k inverse-a shifts.
  // a^-i carries W0 bijectively onto W_-i, so the shifted set is exactly
  // {||chi_W_-i h|| >= 1/3}; the masks are pairwise disjoint, so some mask
  // carries mass at most 1/sqrt(k).
  {
    EssentialityReport<Scalar>& rep = result.a2;
    const double bound = 1.0 / std::sqrt(static_cast<double>(k));
    std::vector<std::string> tlabels;
    for (std::size_t i = 1; i <= k; ++i) tlabels.push_back(word_a_power(-static_cast<long>(i)).str());

    if (bound < 1.0 / 3.0 - 2.0 * eps) {
      rep.label = "A2";
      rep.transforms = std::move(tlabels);
      rep.epsilon = eps;
      rep.seed = seed;
      rep.verdict = Verdict::CertificateEmpty;
      rep.certificate =
          "the masks W_-1..W_-" + std::to_string(k) +
          " are pairwise disjoint, so min_i ||chi_W_-i h|| <= 1/sqrt(k) = " + format_double(bound) +
          "; every point of the i-th eps-neighborhood has ||chi_W_-i h|| >= 1/3 - 2*eps = " +
          format_double(1.0 / 3.0 - 2.0 * eps) + " > 1/sqrt(k), so the intersection is empty";
    } else {
      if (k + 1 > radius)
        throw std::invalid_argument(
            "f2_experiment: radius too small for k shifts (empirical branch needs nonempty "
            "shifted masks)");
      std::vector<SphericalSet<Scalar>> sets;
      for (std::size_t i = 1; i <= k; ++i) {
        const auto mask = prefix_class_indices(universe, -static_cast<long>(i));
        sets.push_back(mask_threshold_set<Scalar>(
            tlabels[i - 1] + "(A2)", n, mask, 1.0 / 3.0, MaskSide::AtLeast));
      }
      rep = witness_search_over_sets<Scalar>("A2", std::move(tlabels), std::move(sets), eps, n, m,
                                             seed ^ 0xA2ull);
    }
  }

  return result;
}

// ---------------------------------------------------------------------------
// Direct-sum lifting

/// Lifts a set A on the j-th factor sphere (j is 1 or 2) to the sphere of the
/// direct sum: points whose j-th component carries mass at least sqrt2/2 and
/// normalizes into A.  When the other factor is trivial the lift is A itself.
template <typename Scalar = double>
SphericalSet<Scalar> lift_set(const SphericalSet<Scalar>& a, int j, Eigen::Index d1,
                              Eigen::Index d2) {
  if (j != 1 && j != 2) throw std::invalid_argument("lift_set: j must be 1 or 2");
  const Eigen::Index own = (j == 1) ? d1 : d2;
  const Eigen::Index other = (j == 1) ? d2 : d1;
  if (a.dimension != own) throw std::invalid_argument("lift_set: factor dimension mismatch");
  if (other == 0) return a;

  const Eigen::Index off = (j == 1) ? 0 : d1;
  const double c = std::sqrt(2.0) / 2.0;
  SphericalSet<Scalar> s;
  s.label = "lift" + std::to_string(j) + "(" + a.label + ")";
  s.dimension = d1 + d2;
  s.member = [inner = a.member, off, own, c](const Vector<Scalar>& x) {
    const Vector<Scalar> part = x.segment(off, own);
    const double mass = part.norm();
    if (mass < c) return false;
    return inner(Vector<Scalar>(part / mass));
  };
  return s;
}

/// Joint lift of covers of the two factor spheres; the union covers the big
/// sphere because every unit vector carries mass at least sqrt2/2 on some
/// factor.
template <typename Scalar = double>
Cover<Scalar> lift_cover(const Cover<Scalar>& gamma1, const Cover<Scalar>& gamma2,
                         Eigen::Index d1, Eigen::Index d2) {
  Cover<Scalar> lifted;
  for (const auto& a : gamma1.sets) lifted.sets.push_back(lift_set(a, 1, d1, d2));
  for (const auto& a : gamma2.sets) lifted.sets.push_back(lift_set(a, 2, d1, d2));
  return lifted;
}

/// One-sided lift (first factor only); covers the big sphere only jointly
/// with a second-factor family.
template <typename Scalar = double>
Cover<Scalar> lift_cover(const Cover<Scalar>& gamma, Eigen::Index d1, Eigen::Index d2) {
  Cover<Scalar> lifted;
  for (const auto& a : gamma.sets) lifted.sets.push_back(lift_set(a, 1, d1, d2));
  return lifted;
}

inline double lift_margin_bound(double eps) {
  return std::min(eps / 3.0, kPi / 8.0);
}

/// Empirical check that inessentiality margins survive lifting: points within
/// delta = min(eps/3, pi/8) of the lifted set normalize-project back into the
/// eps-neighborhood of the base set.  Returns sampled points and violations.
template <typename Scalar = double>
struct LiftStability {
  double delta = 0.0;
  std::size_t checked = 0;
  std::size_t violations = 0;
};

template <typename Scalar = double>
LiftStability<Scalar> lift_margin_check(const SphericalSet<Scalar>& a, int j, Eigen::Index d1,
                                        Eigen::Index d2, double eps, std::size_t samples,
                                        std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("lift_margin_check: eps must be positive");
  if (!a.has_exact_distance())
    throw std::invalid_argument("lift_margin_check: base set needs an exact distance");
  const Eigen::Index own = (j == 1) ? d1 : d2;
  const Eigen::Index other = (j == 1) ? d2 : d1;
  const Eigen::Index off = (j == 1) ? 0 : d1;
  const double c = std::sqrt(2.0) / 2.0;
  const double delta = lift_margin_bound(eps);

  struct Tally {
    std::size_t checked = 0;
    std::size_t violations = 0;
  };
  auto block = [&](std::size_t first, std::size_t last) {
    Tally t;
    for (std::size_t i = first; i < last; ++i) {
      RandomStream rng = RandomStream::for_sample(seed, i);
      // A member of the lifted set: factor part in A, factor mass >= sqrt2/2.
      Vector<Scalar> u;
      bool found = false;
      for (int tries = 0; tries < 256 && !found; ++tries) {
        u = unit_sphere_point<Scalar>(own, rng);
        found = a.member(u);
      }
      if (!found) continue;
      const double mass = c + (1.0 - c) * rng.next_unit();
      Vector<Scalar> x = Vector<Scalar>::Zero(d1 + d2);
      x.segment(off, own) = mass * u;
      if (other > 0) {
        const Vector<Scalar> w = unit_sphere_point<Scalar>(other, rng);
        x.segment(j == 1 ? d1 : 0, other) = std::sqrt(std::max(0.0, 1.0 - mass * mass)) * w;
      }
      // A nearby point within delta, then the projection-normalization step.
      Vector<Scalar> g = gaussian_vector<Scalar>(d1 + d2, rng);
      g /= std::max(g.norm(), 1e-300);
      double step = delta * rng.next_unit();
      Vector<Scalar> z;
      for (;;) {
        z = x + step * g;
        z /= z.norm();
        if ((z - x).norm() <= delta) break;
        step *= 0.5;
      }
      const Vector<Scalar> part = z.segment(off, own);
      const double pm = part.norm();
      ++t.checked;
      if (pm < c - delta - 1e-12) {
        ++t.violations;
        continue;
      }
      const Vector<Scalar> y = part / pm;
      if (!(a.chordal_distance(y) < eps)) ++t.violations;
    }
    return t;
  };
  auto merge = [](Tally into, Tally part) {
    into.checked += part.checked;
    into.violations += part.violations;
    return into;
  };
  const Tally t = parallel_map_reduce<Tally>(samples, Tally{}, block, merge);
  LiftStability<Scalar> out;
  out.delta = delta;
  out.checked = t.checked;
  out.violations = t.violations;
  return out;
}

// ---------------------------------------------------------------------------
// Cover scans

template <typename Scalar = double>
struct ScanEntry {
  std::string label;
  bool essential = false;  // a witness was exhibited for this element
  EssentialityReport<Scalar> report;
};

/// Runs the witness search for every element of a cover against one finite
/// family of transformations.  "Essential" records only that a witness was
/// exhibited for this particular family; absence of a witness never upgrades
/// to a claim of emptiness without a certificate.
template <typename Scalar = double>
std::vector<ScanEntry<Scalar>> essential_element_scan(
    const Cover<Scalar>& gamma, const std::vector<UnitaryAction<Scalar>>& transforms, double eps,
    Eigen::Index d, std::size_t budget, std::uint64_t seed) {
  if (gamma.sets.empty()) throw std::invalid_argument("essential_element_scan: empty cover");
  std::vector<ScanEntry<Scalar>> out;
  std::uint64_t salt = 0;
  for (const auto& a : gamma.sets) {
    ScanEntry<Scalar> entry;
    entry.label = a.label;
    entry.report = witness_search(a, transforms, eps, d, budget, seed + salt);
    entry.essential = entry.report.verdict == Verdict::WitnessFound;
    out.push_back(std::move(entry));
    ++salt;
  }
  return out;
}

/// Scan variant for set-level families.
template <typename Scalar = double>
std::vector<ScanEntry<Scalar>> essential_element_scan(
    const std::vector<SymbolicFamily<Scalar>>& families, double eps, Eigen::Index d,
    std::size_t budget, std::uint64_t seed) {
  if (families.empty()) throw std::invalid_argument("essential_element_scan: empty family list");
  std::vector<ScanEntry<Scalar>> out;
  std::uint64_t salt = 0;
  for (const auto& fam : families) {
    ScanEntry<Scalar> entry;
    entry.label = fam.set_label;
    entry.report = witness_search_over_sets<Scalar>(fam.set_label, fam.transform_labels,
                                                    fam.transformed, eps, d, budget, seed + salt);
    entry.essential = entry.report.verdict == Verdict::WitnessFound;
    out.push_back(std::move(entry));
    ++salt;
  }
  return out;
}

}  // namespace levylab
