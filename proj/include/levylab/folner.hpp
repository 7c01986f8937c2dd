#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "levylab/action.hpp"
#include "levylab/common.hpp"
#include "levylab/dynamics.hpp"
#include "levylab/parallel.hpp"
#include "levylab/rng.hpp"
#include "levylab/spherical_set.hpp"
#include "levylab/subspace.hpp"
#include "levylab/words.hpp"

namespace levylab {

// ---------------------------------------------------------------------------
// Almost-invariant vectors

/// Best almost-invariant unit vector for a finite family of norm-preserving
/// actions, found as the top eigenvector of the averaged self-adjoint
/// operator M = (1/2|F|) sum_g (g + g^{-1}).  Maximizing <M xi, xi> minimizes
/// the mean squared residual (1/|F|) sum ||g xi - xi||^2 = 2 - 2<M xi, xi>,
/// which bounds the max-residual optimum within a factor sqrt(|F|).
template <typename Scalar = double>
struct AlmostInvariantResult {
  Vector<Scalar> xi;                 // unit vector in the full dimension
  double residual = 0.0;             // max_g ||g xi - xi||
  std::vector<std::string> action_labels;
  std::vector<double> per_action;    // ||g xi - xi|| per action
  double top_eigenvalue = 0.0;       // of the averaged operator on the support
  double averaged_residual = 0.0;    // sqrt(2 - 2 * top_eigenvalue)
  Eigen::Index support_dim = 0;

  std::string to_json() const {
    std::string out = "{";
    out += "\"dimension\":" + std::to_string(xi.size()) + ",";
    out += "\"support_dim\":" + std::to_string(support_dim) + ",";
    out += "\"top_eigenvalue\":" + format_double(top_eigenvalue) + ",";
    out += "\"averaged_residual\":" + format_double(averaged_residual) + ",";
    out += "\"residual\":" + format_double(residual) + ",";
    out += "\"per_action\":{";
    for (std::size_t i = 0; i < per_action.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(action_labels[i]) + "\":" + format_double(per_action[i]);
    }
    out += "}}";
    return out;
  }
};

/// When the actions are only partially defined (truncations of a group
/// representation), pass the dimension of a promised support block: the
/// averaged operator is compressed to the first support_dim coordinates and
/// the returned vector is supported there, so every action applies honestly.
template <typename Scalar = double>
AlmostInvariantResult<Scalar> almost_invariant_vector(
    const std::vector<UnitaryAction<Scalar>>& actions, Eigen::Index support_dim = -1) {
  if (actions.empty()) throw std::invalid_argument("almost_invariant_vector: no actions");
  const Eigen::Index d = actions.front().dimension();
  for (const auto& g : actions)
    if (g.dimension() != d)
      throw std::invalid_argument("almost_invariant_vector: dimension mismatch");
  const Eigen::Index s = support_dim < 0 ? d : support_dim;
  if (s < 1 || s > d)
    throw std::invalid_argument("almost_invariant_vector: support dimension out of range");

  Matrix<Scalar> averaged = Matrix<Scalar>::Zero(s, s);
  for (const auto& g : actions) {
    const Matrix<Scalar> corner = g.compression(s);
    averaged += corner + corner.adjoint();
  }
  averaged *= Scalar(1.0 / (2.0 * static_cast<double>(actions.size())));

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(averaged);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("almost_invariant_vector: eigensolver failed");
  const double lambda = es.eigenvalues()(s - 1);
  Vector<Scalar> top = es.eigenvectors().col(s - 1);
  // Pin the phase so the reported vector is a canonical representative:
  // rotate the largest entry onto the positive real axis.
  Eigen::Index arg = 0;
  top.cwiseAbs().maxCoeff(&arg);
  const Scalar pivot = top[arg];
  const double mag = std::abs(pivot);
  if (mag > 0.0) top *= Scalar(mag) / pivot;
  top /= top.norm();

  AlmostInvariantResult<Scalar> out;
  out.xi = Vector<Scalar>::Zero(d);
  out.xi.head(s) = top;
  out.support_dim = s;
  out.top_eigenvalue = lambda;
  out.averaged_residual = std::sqrt(std::max(0.0, 2.0 - 2.0 * lambda));
  for (const auto& g : actions) {
    const double r = (g.apply(out.xi) - out.xi).norm();
    out.action_labels.push_back(g.label());
    out.per_action.push_back(r);
    out.residual = std::max(out.residual, r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subset search

/// A (possibly partial) injective self-map of coordinate indices -- the
/// combinatorial shadow of a basis-permutation action.  image[i] = -1 marks
/// an index with no image inside the universe.
struct IndexMap {
  static constexpr Eigen::Index kNoImage = -1;
  std::string label;
  std::vector<Eigen::Index> image;

  Eigen::Index size() const { return static_cast<Eigen::Index>(image.size()); }
};

inline IndexMap index_map_from_permutation(std::string label, const Permutation& p) {
  IndexMap m;
  m.label = std::move(label);
  m.image.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m.image[i] = static_cast<Eigen::Index>(p(i));
  return m;
}

inline IndexMap cyclic_shift_map(Eigen::Index d) {
  IndexMap m;
  m.label = "shift";
  m.image.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) m.image[i] = (i + 1) % d;
  return m;
}

inline IndexMap word_index_map(const ReducedWord& g, const BallIndex& universe) {
  IndexMap m;
  m.label = g.str();
  m.image.assign(universe.size(), IndexMap::kNoImage);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const std::size_t target = universe.find(g * universe.words()[i]);
    if (target != BallIndex::npos) m.image[i] = static_cast<Eigen::Index>(target);
  }
  return m;
}

/// |gS triangle S| for a coordinate subset S: the trace norm of the
/// difference between the projection onto span{e_i : i in S} and its
/// conjugate by g, computed as an exact integer.  Throws when g is undefined
/// somewhere on S.
inline std::size_t subset_commutator_count(const std::vector<Eigen::Index>& subset,
                                           const IndexMap& g) {
  std::vector<char> in_s(g.image.size(), 0);
  for (Eigen::Index i : subset) {
    if (i < 0 || i >= g.size())
      throw std::invalid_argument("subset_commutator_count: index out of range");
    in_s[static_cast<std::size_t>(i)] = 1;
  }
  std::size_t overlap = 0;
  for (Eigen::Index i : subset) {
    const Eigen::Index t = g.image[static_cast<std::size_t>(i)];
    if (t == IndexMap::kNoImage)
      throw SupportViolationError("subset_commutator_count: '" + g.label +
                                  "' is undefined on the subset");
    if (in_s[static_cast<std::size_t>(t)]) ++overlap;
  }
  return 2 * (subset.size() - overlap);
}

enum class FolnerStrategy { GreedySwap, Exhaustive };

/// Outcome of a search for a coordinate subset nearly invariant under a
/// finite family of index maps, in the normalized trace-norm sense
/// max_g |gS triangle S| / |S|.
struct FolnerSearchResult {
  std::vector<Eigen::Index> subset;  // sorted
  std::size_t rank = 0;
  std::vector<std::string> generator_labels;
  std::vector<std::size_t> symmetric_differences;  // |gS triangle S| per generator
  std::vector<double> ratios;                      // per generator, divided by rank
  double max_ratio = 0.0;
  std::string strategy;
  std::size_t evaluations = 0;
  std::vector<std::string> trace;

  std::string to_json() const {
    std::string out = "{";
    out += "\"rank\":" + std::to_string(rank) + ",";
    out += "\"subset\":[";
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(subset[i]);
    }
    out += "],";
    out += "\"ratios\":{";
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(generator_labels[i]) + "\":" + format_double(ratios[i]);
    }
    out += "},";
    out += "\"max_ratio\":" + format_double(max_ratio) + ",";
    out += "\"strategy\":\"" + json_escape(strategy) + "\",";
    out += "\"evaluations\":" + std::to_string(evaluations) + ",";
    out += "\"trace\":[";
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(trace[i]) + "\"";
    }
    out += "]}";
    return out;
  }
};

namespace detail {

inline constexpr std::size_t kInfeasible = std::numeric_limits<std::size_t>::max();

/// max_g |gS triangle S| over the family, or kInfeasible when some map is
/// undefined on S.  `in_s` must mirror `subset`.
inline std::size_t subset_objective(const std::vector<Eigen::Index>& subset,
                                    const std::vector<char>& in_s,
                                    const std::vector<IndexMap>& maps) {
  std::size_t worst = 0;
  for (const auto& g : maps) {
    std::size_t overlap = 0;
    for (Eigen::Index i : subset) {
      const Eigen::Index t = g.image[static_cast<std::size_t>(i)];
      if (t == IndexMap::kNoImage) return kInfeasible;
      if (in_s[static_cast<std::size_t>(t)]) ++overlap;
    }
    worst = std::max(worst, 2 * (subset.size() - overlap));
  }
  return worst;
}

struct RestartOutcome {
  std::size_t objective = kInfeasible;
  std::size_t restart = 0;
  std::vector<Eigen::Index> subset;
  std::size_t evaluations = 0;
  std::string summary;

  bool better_than(const RestartOutcome& o) const {
    if (objective != o.objective) return objective < o.objective;
    return restart < o.restart;
  }
};

/// One grow-then-swap descent: seed with a random element, grow to rank n by
/// repeatedly adding the element that minimizes the objective, then apply
/// steepest single-element exchanges until no swap improves strictly.
/// (Pure descent from a uniformly random subset stalls on plateaus where
/// every single swap is neutral; growing the start avoids that.)
inline RestartOutcome greedy_restart(const std::vector<IndexMap>& maps,
                                     const std::vector<Eigen::Index>& pool, std::size_t n,
                                     std::size_t restart, std::uint64_t seed) {
  RestartOutcome out;
  out.restart = restart;
  RandomStream rng = RandomStream::for_sample(seed, restart);
  const std::size_t d = static_cast<std::size_t>(maps.front().size());

  std::vector<Eigen::Index> subset{pool[rng.next_below(pool.size())]};
  std::vector<char> in_s(d, 0);
  in_s[static_cast<std::size_t>(subset[0])] = 1;

  while (subset.size() < n) {
    std::size_t best = kInfeasible;
    Eigen::Index best_c = -1;
    for (Eigen::Index c : pool) {
      if (in_s[static_cast<std::size_t>(c)]) continue;
      subset.push_back(c);
      in_s[static_cast<std::size_t>(c)] = 1;
      const std::size_t j = subset_objective(subset, in_s, maps);
      ++out.evaluations;
      subset.pop_back();
      in_s[static_cast<std::size_t>(c)] = 0;
      if (j < best) {
        best = j;
        best_c = c;
      }
    }
    if (best_c < 0) return out;  // nothing feasible to add
    subset.push_back(best_c);
    in_s[static_cast<std::size_t>(best_c)] = 1;
  }
  std::sort(subset.begin(), subset.end());

  std::size_t current = subset_objective(subset, in_s, maps);
  const std::size_t grown = current;
  std::size_t sweeps = 0;
  bool improved = current != kInfeasible;
  while (improved && current > 0) {
    improved = false;
    std::size_t best = current;
    std::size_t best_pos = 0;
    Eigen::Index best_o = -1;
    for (std::size_t pos = 0; pos < subset.size(); ++pos) {
      const Eigen::Index removed = subset[pos];
      in_s[static_cast<std::size_t>(removed)] = 0;
      for (Eigen::Index o : pool) {
        if (in_s[static_cast<std::size_t>(o)] || o == removed) continue;
        subset[pos] = o;
        in_s[static_cast<std::size_t>(o)] = 1;
        const std::size_t j = subset_objective(subset, in_s, maps);
        ++out.evaluations;
        in_s[static_cast<std::size_t>(o)] = 0;
        if (j < best) {
          best = j;
          best_pos = pos;
          best_o = o;
        }
      }
      subset[pos] = removed;
      in_s[static_cast<std::size_t>(removed)] = 1;
    }
    if (best_o >= 0 && best < current) {
      in_s[static_cast<std::size_t>(subset[best_pos])] = 0;
      subset[best_pos] = best_o;
      in_s[static_cast<std::size_t>(best_o)] = 1;
      std::sort(subset.begin(), subset.end());
      current = best;
      improved = true;
      ++sweeps;
    }
  }

  out.objective = current;
  out.subset = std::move(subset);
  out.summary = "restart " + std::to_string(restart) + ": grown " + std::to_string(grown) +
                " -> swaps " + std::to_string(sweeps) + " -> " + std::to_string(current);
  return out;
}

}  // namespace detail

/// Searches for a size-n coordinate subset minimizing
/// max_g |gS triangle S| / n over a finite family of index maps.  `pool`
/// restricts the candidate indices (empty = all).  Greedy-swap runs
/// `restarts` independent grow-and-descend passes in parallel and merges
/// deterministically (best objective, lowest restart index on ties);
/// exhaustive enumerates all C(|pool|, n) subsets and refuses upfront beyond
/// 10^6 of them.
inline FolnerSearchResult folner_subset_search(const std::vector<IndexMap>& maps, std::size_t n,
                                               FolnerStrategy strategy,
                                               std::vector<Eigen::Index> pool = {},
                                               std::size_t restarts = 32,
                                               std::uint64_t seed = 0) {
  if (maps.empty()) throw std::invalid_argument("folner_subset_search: no maps");
  const Eigen::Index d = maps.front().size();
  for (const auto& g : maps)
    if (g.size() != d) throw std::invalid_argument("folner_subset_search: size mismatch");
  if (pool.empty()) {
    pool.resize(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) pool[static_cast<std::size_t>(i)] = i;
  }
  std::sort(pool.begin(), pool.end());
  for (Eigen::Index i : pool)
    if (i < 0 || i >= d) throw std::invalid_argument("folner_subset_search: pool out of range");
  if (n < 1 || n > pool.size())
    throw std::invalid_argument("folner_subset_search: rank out of range");

  FolnerSearchResult result;
  result.rank = n;

  if (strategy == FolnerStrategy::Exhaustive) {
    double combos = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      combos *= static_cast<double>(pool.size() - i) / static_cast<double>(i + 1);
    if (combos > 1e6)
      throw ResourceLimitError("folner_subset_search: C(" + std::to_string(pool.size()) + "," +
                               std::to_string(n) + ") exceeds the exhaustive budget of 1e6");
    result.strategy = "exhaustive";
    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i) pick[i] = i;
    std::vector<Eigen::Index> subset(n);
    std::vector<char> in_s(static_cast<std::size_t>(d), 0);
    std::size_t best = detail::kInfeasible;
    std::vector<Eigen::Index> best_subset;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) subset[i] = pool[pick[i]];
      for (Eigen::Index i : subset) in_s[static_cast<std::size_t>(i)] = 1;
      const std::size_t j = detail::subset_objective(subset, in_s, maps);
      ++result.evaluations;
      for (Eigen::Index i : subset) in_s[static_cast<std::size_t>(i)] = 0;
      if (j < best) {
        best = j;
        best_subset = subset;
      }
      // next combination in lexicographic order
      std::size_t k = n;
      while (k > 0 && pick[k - 1] == pool.size() - n + k - 1) --k;
      if (k == 0) break;
      ++pick[k - 1];
      for (std::size_t i = k; i < n; ++i) pick[i] = pick[i - 1] + 1;
    }
    if (best == detail::kInfeasible)
      throw std::invalid_argument("folner_subset_search: no feasible subset");
    result.subset = std::move(best_subset);
    result.trace.push_back("exhaustive: " + std::to_string(result.evaluations) +
                           " subsets, optimum " + std::to_string(best));
  } else {
    result.strategy = "greedy-swap";
    if (restarts == 0) throw std::invalid_argument("folner_subset_search: zero restarts");
    using Outcome = detail::RestartOutcome;
    auto block = [&](std::size_t first, std::size_t last) {
      Outcome blockbest;
      blockbest.restart = std::numeric_limits<std::size_t>::max();
      std::size_t evaluations = 0;
      std::vector<std::string> summaries;
      for (std::size_t r = first; r < last; ++r) {
        Outcome o = detail::greedy_restart(maps, pool, n, r, seed);
        evaluations += o.evaluations;
        summaries.push_back(o.summary);
        if (o.better_than(blockbest)) blockbest = std::move(o);
      }
      blockbest.evaluations = evaluations;
      blockbest.summary = "";
      for (const auto& s : summaries)
        blockbest.summary += (blockbest.summary.empty() ? "" : "; ") + s;
      return blockbest;
    };
    auto merge = [](Outcome into, Outcome part) {
      const std::size_t evaluations = into.evaluations + part.evaluations;
      std::string summary = into.summary;
      if (!part.summary.empty()) summary += (summary.empty() ? "" : "; ") + part.summary;
      if (part.better_than(into)) into = std::move(part);
      into.evaluations = evaluations;
      into.summary = std::move(summary);
      return into;
    };
    Outcome init;
    init.restart = std::numeric_limits<std::size_t>::max();
    Outcome best = parallel_map_reduce<Outcome>(restarts, std::move(init), block, merge,
                                                /*block_size=*/1);
    if (best.objective == detail::kInfeasible)
      throw std::invalid_argument("folner_subset_search: no feasible subset found");
    result.subset = std::move(best.subset);
    result.evaluations = best.evaluations;
    result.trace.push_back(best.summary);
  }

  // Recompute the reported ratios from scratch; they must agree exactly with
  // what the search believed.
  std::size_t worst = 0;
  for (const auto& g : maps) {
    const std::size_t count = subset_commutator_count(result.subset, g);
    result.generator_labels.push_back(g.label);
    result.symmetric_differences.push_back(count);
    result.ratios.push_back(static_cast<double>(count) / static_cast<double>(n));
    worst = std::max(worst, count);
  }
  result.max_ratio = static_cast<double>(worst) / static_cast<double>(n);
  return result;
}

// ---------------------------------------------------------------------------
// Trace-norm commutators

/// ||g P g^{-1} - P||_1 for a dense projection given by a frame: conjugation
/// by g carries the range frame to g F, and the trace distance of the two
/// projections is computed from singular values.
template <typename Scalar>
double trace_commutator(const Frame<Scalar>& p, const UnitaryAction<Scalar>& g) {
  if (g.dimension() != p.ambient_dimension())
    throw std::invalid_argument("trace_commutator: dimension mismatch");
  Matrix<Scalar> moved(p.ambient_dimension(), p.rank());
  for (Eigen::Index j = 0; j < p.rank(); ++j)
    moved.col(j) = g.apply(Vector<Scalar>(p.columns().col(j)));
  return trace_distance(Frame<Scalar>(moved), p);
}

/// Subset route of the same quantity: for coordinate projections the trace
/// norm counts the symmetric difference exactly.
inline std::size_t trace_commutator(const std::vector<Eigen::Index>& subset, const IndexMap& g) {
  return subset_commutator_count(subset, g);
}

// ---------------------------------------------------------------------------
// Projection-sequence pipeline

/// Diagnostics of an increasing sequence of nearly invariant sub-spheres
/// probed against a cover: conjugation ratios along the sequence, empirical
/// measures of each cover element on each sub-sphere, the selected candidate
/// element, the transport cost of moving each action's image sphere back onto
/// the sub-sphere, and a witness search at doubled radius on the largest
/// sub-sphere.
template <typename Scalar = double>
struct LevySequenceReport {
  std::vector<Eigen::Index> ranks;
  std::vector<std::string> action_labels;
  std::vector<std::vector<double>> commutator_ratios;  // [frame][action]
  bool ratios_decreasing = true;
  std::vector<std::string> element_labels;
  std::vector<std::vector<double>> element_measures;   // [frame][element]
  std::vector<std::size_t> qualifying_counts;          // frames with measure >= 1/|cover|
  std::size_t chosen_element = 0;
  std::vector<double> transport_displacements;         // [action], on the largest frame
  EssentialityReport<Scalar> search;                   // at 2*eps on the largest sub-sphere

  std::string to_json() const {
    auto ratio_rows = [&] {
      std::string s = "[";
      for (std::size_t f = 0; f < commutator_ratios.size(); ++f) {
        if (f) s += ",";
        s += "[";
        for (std::size_t a = 0; a < commutator_ratios[f].size(); ++a) {
          if (a) s += ",";
          s += format_double(commutator_ratios[f][a]);
        }
        s += "]";
      }
      return s + "]";
    };
    auto measure_rows = [&] {
      std::string s = "[";
      for (std::size_t f = 0; f < element_measures.size(); ++f) {
        if (f) s += ",";
        s += "[";
        for (std::size_t e = 0; e < element_measures[f].size(); ++e) {
          if (e) s += ",";
          s += format_double(element_measures[f][e]);
        }
        s += "]";
      }
      return s + "]";
    };
    std::string out = "{";
    out += "\"ranks\":[";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(ranks[i]);
    }
    out += "],";
    out += "\"actions\":[";
    for (std::size_t i = 0; i < action_labels.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(action_labels[i]) + "\"";
    }
    out += "],";
    out += "\"commutator_ratios\":" + ratio_rows() + ",";
    out += "\"ratios_decreasing\":" + std::string(ratios_decreasing ? "true" : "false") + ",";
    out += "\"elements\":[";
    for (std::size_t i = 0; i < element_labels.size(); ++i) {
      if (i) out += ",";
      out += "\"" + json_escape(element_labels[i]) + "\"";
    }
    out += "],";
    out += "\"element_measures\":" + measure_rows() + ",";
    out += "\"qualifying_counts\":[";
    for (std::size_t i = 0; i < qualifying_counts.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(qualifying_counts[i]);
    }
    out += "],";
    out += "\"chosen_element\":\"" + json_escape(element_labels[chosen_element]) + "\",";
    out += "\"transport_displacements\":[";
    for (std::size_t i = 0; i < transport_displacements.size(); ++i) {
      if (i) out += ",";
      out += format_double(transport_displacements[i]);
    }
    out += "],";
    out += "\"search\":" + search.to_json();
    return out + "}";
  }
};

template <typename Scalar = double>
LevySequenceReport<Scalar> levy_sequence_experiment(const std::vector<Frame<Scalar>>& frames,
                                                    const std::vector<UnitaryAction<Scalar>>& actions,
                                                    const Cover<Scalar>& gamma, double eps,
                                                    std::size_t m, std::uint64_t seed) {
  if (frames.empty()) throw std::invalid_argument("levy_sequence_experiment: empty sequence");
  if (actions.empty()) throw std::invalid_argument("levy_sequence_experiment: no actions");
  if (gamma.sets.empty()) throw std::invalid_argument("levy_sequence_experiment: empty cover");
  if (!(eps > 0.0)) throw std::invalid_argument("levy_sequence_experiment: eps must be positive");
  const Eigen::Index d = frames.front().ambient_dimension();
  for (const auto& f : frames)
    if (f.ambient_dimension() != d)
      throw std::invalid_argument("levy_sequence_experiment: ambient dimension mismatch");
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].rank() <= frames[i - 1].rank())
      throw std::invalid_argument("levy_sequence_experiment: ranks must increase");
  for (const auto& g : actions)
    if (g.dimension() != d)
      throw std::invalid_argument("levy_sequence_experiment: action dimension mismatch");

  LevySequenceReport<Scalar> report;
  for (const auto& f : frames) report.ranks.push_back(f.rank());
  for (const auto& g : actions) report.action_labels.push_back(g.label());
  for (const auto& a : gamma.sets) report.element_labels.push_back(a.label);

  // Conjugation ratios along the sequence.
  for (const auto& f : frames) {
    std::vector<double> row;
    for (const auto& g : actions)
      row.push_back(trace_commutator(f, g) / static_cast<double>(f.rank()));
    report.commutator_ratios.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < actions.size() && report.ratios_decreasing; ++a)
    for (std::size_t f = 1; f < frames.size(); ++f)
      if (report.commutator_ratios[f][a] > report.commutator_ratios[f - 1][a] + 1e-12) {
        report.ratios_decreasing = false;
        break;
      }

  // Empirical measure of each cover element on each sub-sphere.
  const double quota = 1.0 / static_cast<double>(gamma.sets.size());
  report.qualifying_counts.assign(gamma.sets.size(), 0);
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const Frame<Scalar>& f = frames[fi];
    const std::uint64_t frame_seed = seed ^ (0xF0ull + fi);
    std::vector<std::size_t> counts = parallel_map_reduce<std::vector<std::size_t>>(
        m, std::vector<std::size_t>(gamma.sets.size(), 0),
        [&](std::size_t first, std::size_t last) {
          std::vector<std::size_t> h(gamma.sets.size(), 0);
          for (std::size_t i = first; i < last; ++i) {
            RandomStream rng = RandomStream::for_sample(frame_seed, i);
            const Vector<Scalar> x = f.columns() * unit_sphere_point<Scalar>(f.rank(), rng);
            for (std::size_t e = 0; e < gamma.sets.size(); ++e)
              if (gamma.sets[e].member(x)) ++h[e];
          }
          return h;
        },
        [](std::vector<std::size_t> into, std::vector<std::size_t> part) {
          for (std::size_t e = 0; e < into.size(); ++e) into[e] += part[e];
          return into;
        });
    std::vector<double> row;
    for (std::size_t e = 0; e < gamma.sets.size(); ++e) {
      const double mu = static_cast<double>(counts[e]) / static_cast<double>(m);
      row.push_back(mu);
      if (mu >= quota) ++report.qualifying_counts[e];
    }
    report.element_measures.push_back(std::move(row));
  }
  report.chosen_element = static_cast<std::size_t>(
      std::max_element(report.qualifying_counts.begin(), report.qualifying_counts.end()) -
      report.qualifying_counts.begin());

  // Transport cost: how far the isometry carrying each action's image sphere
  // back onto the sub-sphere moves sampled points of the image sphere.
  const Frame<Scalar>& top = frames.back();
  for (const auto& g : actions) {
    Matrix<Scalar> moved(d, top.rank());
    for (Eigen::Index j = 0; j < top.rank(); ++j)
      moved.col(j) = g.apply(Vector<Scalar>(top.columns().col(j)));
    const Frame<Scalar> image(moved);
    const IsometryMap<Scalar> back = build_isometry(image, top);
    const std::size_t probes = std::min<std::size_t>(m, 2000);
    double worst = 0.0;
    for (std::size_t i = 0; i < probes; ++i) {
      RandomStream rng = RandomStream::for_sample(seed ^ 0x7Aull, i);
      const Vector<Scalar> x = image.columns() * unit_sphere_point<Scalar>(image.rank(), rng);
      worst = std::max(worst, (back.apply(x) - x).norm());
    }
    report.transport_displacements.push_back(worst);
  }

  // Witness search at doubled radius on the largest sub-sphere.
  {
    const SphericalSet<Scalar>& chosen = gamma.sets[report.chosen_element];
    std::vector<SphericalSet<Scalar>> sets;
    std::vector<std::string> labels;
    for (const auto& g : actions) {
      sets.push_back(transformed_set(g, chosen));
      labels.push_back(g.label());
    }
    const double radius = 2.0 * eps;
    EssentialityReport<Scalar> rep;
    rep.label = chosen.label;
    rep.transforms = labels;
    rep.epsilon = radius;
    rep.seed = seed;

    const std::size_t uniform_count = m / 2;
    auto uniform = detail::search_phase<Scalar>(sets, radius, uniform_count, [&](std::size_t i) {
      RandomStream rng = RandomStream::for_sample(seed ^ 0x5EA4ull, i);
      return Vector<Scalar>(top.columns() * unit_sphere_point<Scalar>(top.rank(), rng));
    });
    rep.samples = uniform_count;
    detail::SearchCandidate<Scalar> best = uniform.best;
    std::optional<detail::SearchCandidate<Scalar>> hit = uniform.hit;
    if (!hit && uniform_count > 0 && best.point.size() == d) {
      const std::size_t per_round = (m - uniform_count) / detail::kRefinementRounds;
      double cap = detail::kInitialCapRadius;
      for (std::size_t round = 1; round <= detail::kRefinementRounds && !hit; ++round) {
        const Vector<Scalar> center_coords = top.columns().adjoint() * best.point;
        const std::uint64_t round_seed = seed ^ (0x5EA4ull + round);
        auto refined = detail::search_phase<Scalar>(sets, radius, per_round, [&](std::size_t i) {
          RandomStream rng = RandomStream::for_sample(round_seed, i);
          Vector<Scalar> u = detail::cap_point<Scalar>(
              Vector<Scalar>(center_coords / center_coords.norm()), cap, rng);
          return Vector<Scalar>(top.columns() * u);
        });
        rep.samples += per_round;
        if (refined.best.better_than(best)) best = std::move(refined.best);
        if (refined.hit) hit = std::move(refined.hit);
        cap *= 0.5;
      }
    }
    if (hit) {
      for (const auto& s : sets)
        if (!(s.distance_upper(hit->point) < radius))
          throw std::logic_error("levy_sequence_experiment: witness failed re-verification");
      rep.verdict = Verdict::WitnessFound;
      rep.witness = hit->point;
      rep.margin = hit->score;
    } else {
      rep.verdict = Verdict::Inconclusive;
      rep.margin = best.score;
    }
    report.search = std::move(rep);
  }

  return report;
}

}  // namespace levylab
