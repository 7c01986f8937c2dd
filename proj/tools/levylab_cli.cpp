// levylab command-line interface: every experiment of the library as a
// seeded, reproducible subcommand.  Artifacts (CSV or JSON) go to --out or to
// stdout; fixed-width diagnostic tables go to stderr; identical flags and
// seed produce byte-identical artifacts.  Exit codes: 0 success, 2 invalid
// arguments, 3 resource limits.

#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levylab/levylab.hpp"

namespace {

using levylab::ExperimentConfig;
using levylab::format_double;
using levylab::format_double_fixed;
using Complex = std::complex<double>;

// Real-valued flags are accepted as plain numbers or fractions "p/q"; parsing
// is shared with the config-file reader so both syntaxes agree everywhere.
double real_arg(const std::string& name, const std::string& text) {
  ExperimentConfig c;
  c.set(name, text);
  return c.get_real(name);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// The artifact goes to stdout when no --out is given, otherwise to the file
// (with a one-line confirmation on stdout).
void deliver(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
  out << text;
  std::cout << "wrote " << out_path << " (" << text.size() << " bytes)\n";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size() + 1, ' ');
}

template <typename Scalar>
std::string report_table(const std::vector<std::pair<std::string,
                                                     const levylab::EssentialityReport<Scalar>*>>& rows) {
  std::string out = pad("element", 10) + pad("verdict", 18) + pad("epsilon", 10) +
                    pad("samples", 10) + pad("margin", 12) + "\n";
  for (const auto& [name, rep] : rows) {
    const bool finite = rep->margin < std::numeric_limits<double>::infinity();
    out += pad(name, 10) + pad(levylab::verdict_name(rep->verdict), 18) +
           pad(format_double_fixed(rep->epsilon, 6), 10) + pad(std::to_string(rep->samples), 10) +
           pad(finite ? format_double_fixed(rep->margin, 6) : "-", 12) + "\n";
  }
  return out;
}

std::string curve_artifact(const levylab::ConcentrationCurve& curve, const std::string& format) {
  if (format == "csv") return curve.to_csv();
  if (format == "json") return curve.to_json().dump(2) + "\n";
  throw std::invalid_argument("format must be csv or json");
}

std::vector<Eigen::Index> parse_rank_list(const std::string& text) {
  std::vector<Eigen::Index> ranks;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    long long v = 0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || v < 1)
      throw std::invalid_argument("bad rank list entry '" + cell + "'");
    ranks.push_back(static_cast<Eigen::Index>(v));
  }
  if (ranks.empty()) throw std::invalid_argument("empty rank list");
  return ranks;
}

// ---------------------------------------------------------------------------
// concentration curves

struct CurveOpts {
  long long n = 10;
  std::string eps_max = "1.5707963267948966";
  std::size_t steps = 50;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
};

void run_alpha_exact(const CurveOpts& o) {
  const auto curve = levylab::exact_cap_curve(static_cast<int>(o.n),
                                              real_arg("eps-max", o.eps_max), o.steps);
  deliver(o.out, curve_artifact(curve, o.format));
}

void run_alpha_mc(const CurveOpts& o) {
  const Eigen::Index d = static_cast<Eigen::Index>(o.n) + 1;  // S^n lives in R^(n+1)
  levylab::Vector<double> pole = levylab::Vector<double>::Zero(d);
  pole[0] = 1.0;
  const auto hemisphere = levylab::cap_set<double>("hemisphere", pole, levylab::kPi / 2);
  const auto curve = levylab::empirical_curve(hemisphere, d, real_arg("eps-max", o.eps_max),
                                              o.steps, o.samples, o.seed);
  deliver(o.out, curve_artifact(curve, o.format));
}

struct LevyBoundOpts {
  long long n = 100;
  std::string eps = "0";
  std::string eps_max = "1.5707963267948966";
  std::size_t steps = 0;  // 0 = single value, >= 2 = curve
  std::string format = "csv";
  std::string out;
};

void run_levy_bound(const LevyBoundOpts& o) {
  if (o.steps == 0) {
    const double v = levylab::levy_bound(static_cast<int>(o.n), real_arg("eps", o.eps));
    deliver(o.out, format_double_fixed(v, 6) + "\n");
    return;
  }
  const auto curve = levylab::levy_bound_curve(static_cast<int>(o.n),
                                               real_arg("eps-max", o.eps_max), o.steps);
  deliver(o.out, curve_artifact(curve, o.format));
}

// ---------------------------------------------------------------------------
// subspace geometry

struct FrameOpts {
  long long d = 40;
  long long rank = 5;
  long long pairs = 20;
  std::size_t samples = 200;
  std::string eps = "0.5";
  std::uint64_t seed = 0;
  bool complex_field = false;
  std::string left;
  std::string right;
  std::string out;
};

template <typename Scalar>
void run_angles_t(const FrameOpts& o) {
  levylab::Frame<Scalar> f1 = o.left.empty()
                                  ? levylab::random_frame<Scalar>(o.d, o.rank, o.seed)
                                  : levylab::frame_from_csv<Scalar>(read_file(o.left));
  levylab::Frame<Scalar> f2 = o.right.empty()
                                  ? levylab::random_frame<Scalar>(o.d, o.rank, o.seed ^ 0x517Eull)
                                  : levylab::frame_from_csv<Scalar>(read_file(o.right));
  const auto dec = levylab::principal_angles(f1, f2);
  nlohmann::json j = dec.to_json();
  j["d"] = f1.ambient_dimension();
  j["n"] = f1.rank();
  j["trace_distance"] = levylab::trace_distance(f1, f2);
  double two_sum_sin = 0.0;
  for (double a : dec.angles) two_sum_sin += 2.0 * std::sin(a);
  j["two_sum_sin"] = two_sum_sin;
  deliver(o.out, j.dump(2) + "\n");
}

void run_angles(const FrameOpts& o) {
  o.complex_field ? run_angles_t<Complex>(o) : run_angles_t<double>(o);
}

template <typename Scalar>
void run_isometry_check_t(const FrameOpts& o) {
  const double root2 = std::sqrt(2.0);
  std::size_t violations = 0;
  double max_displacement = 0.0;
  double max_ratio = 0.0;
  for (long long p = 0; p < o.pairs; ++p) {
    const std::uint64_t pair_seed = o.seed ^ (0x1503ull + static_cast<std::uint64_t>(p));
    const auto f1 = levylab::random_frame<Scalar>(o.d, o.rank, pair_seed);
    const auto f2 = levylab::random_frame<Scalar>(o.d, o.rank, pair_seed ^ 0xFEEDull);
    const auto iso = levylab::build_isometry(f1, f2);
    const levylab::Matrix<Scalar> p2 = f2.projection();
    for (std::size_t i = 0; i < o.samples; ++i) {
      levylab::RandomStream rng = levylab::RandomStream::for_sample(pair_seed ^ 0xD157ull, i);
      const levylab::Vector<Scalar> x =
          f1.columns() * levylab::unit_sphere_point<Scalar>(o.rank, rng);
      const double moved = (iso.apply(x) - x).norm();
      const double dist = (x - p2 * x).norm();
      if (moved > root2 * dist + 1e-9) ++violations;
      max_displacement = std::max(max_displacement, moved);
      if (dist > 1e-12) max_ratio = std::max(max_ratio, moved / dist);
    }
  }
  std::string j = "{";
  j += "\"d\":" + std::to_string(o.d) + ",";
  j += "\"n\":" + std::to_string(o.rank) + ",";
  j += "\"pairs\":" + std::to_string(o.pairs) + ",";
  j += "\"samples_per_pair\":" + std::to_string(o.samples) + ",";
  j += "\"bound_factor\":" + format_double(root2) + ",";
  j += "\"violations\":" + std::to_string(violations) + ",";
  j += "\"max_displacement\":" + format_double(max_displacement) + ",";
  j += "\"max_ratio\":" + format_double(max_ratio) + ",";
  j += "\"seed\":" + std::to_string(o.seed) + "}\n";
  deliver(o.out, j);
}

void run_isometry_check(const FrameOpts& o) {
  o.complex_field ? run_isometry_check_t<Complex>(o) : run_isometry_check_t<double>(o);
}

template <typename Scalar>
void run_proximity_t(const FrameOpts& o) {
  const auto f1 = levylab::random_frame<Scalar>(o.d, o.rank, o.seed);
  const auto f2 = levylab::random_frame<Scalar>(o.d, o.rank, o.seed ^ 0x517Eull);
  const double eps = real_arg("eps", o.eps);
  const levylab::ProximityMass pm = levylab::proximity_mass(f1, f2, eps, o.samples, o.seed);
  std::string j = "{";
  j += "\"d\":" + std::to_string(o.d) + ",";
  j += "\"n\":" + std::to_string(o.rank) + ",";
  j += "\"eps\":" + format_double(eps) + ",";
  j += "\"estimate\":" + format_double(pm.estimate) + ",";
  j += "\"std_error\":" + format_double(pm.std_error) + ",";
  j += "\"reference_bound\":" + format_double(pm.reference_bound) + ",";
  j += "\"samples\":" + std::to_string(pm.samples) + ",";
  j += "\"seed\":" + std::to_string(pm.seed) + "}\n";
  deliver(o.out, j);
}

void run_proximity(const FrameOpts& o) {
  o.complex_field ? run_proximity_t<Complex>(o) : run_proximity_t<double>(o);
}

// ---------------------------------------------------------------------------
// counterexample experiments

struct LeaderOpts {
  long long d = 300;
  std::string eps = "0.05";
  std::size_t budget = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_leader(const LeaderOpts& o) {
  const auto reports = levylab::leader_experiment<double>(o.d, real_arg("eps", o.eps), o.budget,
                                                          o.seed);
  std::cerr << report_table<double>({{"A", &reports[0]}, {"B", &reports[1]}});
  deliver(o.out, "{\"A\":" + reports[0].to_json() + ",\"B\":" + reports[1].to_json() + "}\n");
}

struct F2Opts {
  std::size_t radius = 6;
  std::string eps = "1/12";
  std::size_t k = 4;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_f2(const F2Opts& o) {
  const double eps = real_arg("eps", o.eps);
  const auto x = levylab::f2_experiment<double>(o.radius, eps, o.k, o.samples, o.seed);
  std::cerr << report_table<double>({{"A1", &x.a1}, {"A2", &x.a2}});
  std::string j = "{";
  j += "\"radius\":" + std::to_string(o.radius) + ",";
  j += "\"eps\":" + format_double(eps) + ",";
  j += "\"k\":" + std::to_string(o.k) + ",";
  j += "\"A1\":" + x.a1.to_json() + ",";
  j += "\"A2\":" + x.a2.to_json() + ",";
  j += "\"a1_samples\":" + std::to_string(x.a1_samples) + ",";
  j += "\"a1_violations\":" + std::to_string(x.a1_violations) + ",";
  j += "\"a1_min_push_mass\":" + format_double(x.a1_min_push_mass) + ",";
  j += "\"a1_min_distance\":" + format_double(x.a1_min_distance) + "}\n";
  deliver(o.out, j);
}

struct LiftOpts {
  long long d1 = 3;
  long long d2 = 3;
  std::string eps = "0.3";
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_lift_cover(const LiftOpts& o) {
  const double eps = real_arg("eps", o.eps);
  auto hemisphere_cover = [](Eigen::Index d) {
    levylab::Vector<double> pole = levylab::Vector<double>::Zero(d);
    pole[0] = 1.0;
    levylab::Cover<double> c;
    c.sets.push_back(levylab::cap_set<double>("north", pole, levylab::kPi / 2));
    c.sets.push_back(levylab::cap_set<double>("south", -pole, levylab::kPi / 2));
    return c;
  };
  const levylab::Cover<double> gamma1 = hemisphere_cover(o.d1);
  const levylab::Cover<double> gamma2 = hemisphere_cover(o.d2);
  const levylab::Cover<double> lifted = levylab::lift_cover(gamma1, gamma2, o.d1, o.d2);
  const std::size_t uncovered = lifted.empirical_uncovered(o.samples, o.seed);
  const auto stability = levylab::lift_margin_check(gamma1.sets[0], 1, o.d1, o.d2, eps,
                                                    std::max<std::size_t>(1, o.samples / 10),
                                                    o.seed ^ 0x11F7ull);
  std::string j = "{";
  j += "\"d1\":" + std::to_string(o.d1) + ",";
  j += "\"d2\":" + std::to_string(o.d2) + ",";
  j += "\"eps\":" + format_double(eps) + ",";
  j += "\"delta\":" + format_double(stability.delta) + ",";
  j += "\"sets\":[";
  for (std::size_t i = 0; i < lifted.sets.size(); ++i) {
    if (i) j += ",";
    j += "\"" + levylab::json_escape(lifted.sets[i].label) + "\"";
  }
  j += "],";
  j += "\"cover_samples\":" + std::to_string(o.samples) + ",";
  j += "\"uncovered\":" + std::to_string(uncovered) + ",";
  j += "\"margin_checked\":" + std::to_string(stability.checked) + ",";
  j += "\"margin_violations\":" + std::to_string(stability.violations) + ",";
  j += "\"seed\":" + std::to_string(o.seed) + "}\n";
  deliver(o.out, j);
}

struct ScanOpts {
  std::string preset = "leader";
  long long d = 300;
  std::string eps = "0.05";
  std::size_t budget = 20000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_scan(const ScanOpts& o) {
  const double eps = real_arg("eps", o.eps);
  std::vector<levylab::ScanEntry<double>> entries;
  if (o.preset == "leader") {
    entries = levylab::essential_element_scan<double>(levylab::leader_families<double>(o.d), eps,
                                                      o.d, o.budget, o.seed);
  } else if (o.preset == "hemispheres") {
    levylab::Vector<double> pole = levylab::Vector<double>::Zero(o.d);
    pole[0] = 1.0;
    levylab::Cover<double> cover;
    cover.sets.push_back(levylab::cap_set<double>("north", pole, levylab::kPi / 2));
    cover.sets.push_back(levylab::cap_set<double>("south", -pole, levylab::kPi / 2));
    std::vector<levylab::UnitaryAction<double>> transforms{
        levylab::UnitaryAction<double>::scalar("id", 1.0, o.d),
        levylab::UnitaryAction<double>::scalar("flip", -1.0, o.d)};
    entries = levylab::essential_element_scan<double>(cover, transforms, eps, o.d, o.budget,
                                                      o.seed);
  } else {
    throw std::invalid_argument("preset must be leader or hemispheres");
  }
  std::vector<std::pair<std::string, const levylab::EssentialityReport<double>*>> rows;
  for (const auto& e : entries) rows.emplace_back(e.label, &e.report);
  std::cerr << report_table<double>(rows);
  std::string j = "[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) j += ",";
    j += "{\"label\":\"" + levylab::json_escape(entries[i].label) + "\",";
    j += "\"essential\":" + std::string(entries[i].essential ? "true" : "false") + ",";
    j += "\"report\":" + entries[i].report.to_json() + "}";
  }
  j += "]\n";
  deliver(o.out, j);
}

// ---------------------------------------------------------------------------
// invariance searches

struct AlmostInvariantOpts {
  std::string family = "f2";
  long long d = 16;
  std::size_t radius = 5;
  long long support_radius = -1;
  bool complex_field = false;
  std::string out;
};

template <typename Scalar>
void run_almost_invariant_t(const AlmostInvariantOpts& o) {
  levylab::AlmostInvariantResult<Scalar> result;
  if (o.family == "cyclic") {
    result = levylab::almost_invariant_vector<Scalar>({levylab::cyclic_shift_action<Scalar>(o.d)});
  } else if (o.family == "scalar") {
    result = levylab::almost_invariant_vector<Scalar>(
        {levylab::UnitaryAction<Scalar>::scalar("-I", Scalar(-1), o.d)});
  } else if (o.family == "f2") {
    const levylab::BallIndex universe(o.radius);
    const std::size_t support_radius =
        o.support_radius < 0 ? o.radius - 1 : static_cast<std::size_t>(o.support_radius);
    const auto support_dim = static_cast<Eigen::Index>(levylab::ball_size(support_radius));
    result = levylab::almost_invariant_vector<Scalar>(
        {levylab::regular_action<Scalar>(levylab::word_a(), universe),
         levylab::regular_action<Scalar>(levylab::word_b(), universe)},
        support_dim);
  } else {
    throw std::invalid_argument("family must be cyclic, scalar, or f2");
  }
  std::cerr << "residual " << format_double_fixed(result.residual, 6) << "  top eigenvalue "
            << format_double_fixed(result.top_eigenvalue, 6) << "\n";
  deliver(o.out, result.to_json() + "\n");
}

void run_almost_invariant(const AlmostInvariantOpts& o) {
  o.complex_field ? run_almost_invariant_t<Complex>(o) : run_almost_invariant_t<double>(o);
}

struct FolnerOpts {
  std::string family = "shift";
  long long d = 100;
  std::size_t n = 20;
  std::string strategy = "greedy";
  std::size_t restarts = 32;
  std::size_t universe_radius = 3;
  std::size_t pool_radius = 2;
  std::uint64_t seed = 0;
  std::string out;
};

void run_folner(const FolnerOpts& o) {
  levylab::FolnerStrategy strategy;
  if (o.strategy == "greedy") strategy = levylab::FolnerStrategy::GreedySwap;
  else if (o.strategy == "exhaustive") strategy = levylab::FolnerStrategy::Exhaustive;
  else throw std::invalid_argument("strategy must be greedy or exhaustive");

  std::vector<levylab::IndexMap> maps;
  std::vector<Eigen::Index> pool;
  if (o.family == "shift") {
    maps.push_back(levylab::cyclic_shift_map(o.d));
  } else if (o.family == "identity") {
    maps.push_back(levylab::index_map_from_permutation(
        "id", levylab::Permutation::identity(static_cast<std::size_t>(o.d))));
  } else if (o.family == "f2") {
    const levylab::BallIndex universe(o.universe_radius);
    maps.push_back(levylab::word_index_map(levylab::word_a(), universe));
    maps.push_back(levylab::word_index_map(levylab::word_b(), universe));
    const auto pool_size = static_cast<Eigen::Index>(levylab::ball_size(o.pool_radius));
    for (Eigen::Index i = 0; i < pool_size; ++i) pool.push_back(i);
  } else {
    throw std::invalid_argument("family must be shift, identity, or f2");
  }
  const auto result = levylab::folner_subset_search(maps, o.n, strategy, pool, o.restarts, o.seed);
  std::string table = pad("generator", 12) + pad("|gS (delta) S|", 16) + pad("ratio", 10) + "\n";
  for (std::size_t i = 0; i < result.generator_labels.size(); ++i)
    table += pad(result.generator_labels[i], 12) +
             pad(std::to_string(result.symmetric_differences[i]), 16) +
             pad(format_double_fixed(result.ratios[i], 6), 10) + "\n";
  std::cerr << table;
  deliver(o.out, result.to_json() + "\n");
}

struct LevySequenceOpts {
  std::string preset = "scalar";
  long long d = 40;
  std::string ranks = "5,10,20,40";
  std::string eps = "0.1";
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  std::string out;
};

template <typename Scalar>
levylab::Cover<Scalar> hemisphere_cover_for(Eigen::Index d) {
  levylab::Vector<Scalar> pole = levylab::Vector<Scalar>::Zero(d);
  pole[0] = Scalar(1);
  levylab::Cover<Scalar> c;
  c.sets.push_back(levylab::cap_set<Scalar>("north", pole, levylab::kPi / 2));
  c.sets.push_back(levylab::cap_set<Scalar>("south", -pole, levylab::kPi / 2));
  return c;
}

template <typename Scalar>
std::vector<levylab::Frame<Scalar>> coordinate_prefix_frames(Eigen::Index d,
                                                             const std::vector<Eigen::Index>& ranks) {
  std::vector<levylab::Frame<Scalar>> frames;
  for (Eigen::Index r : ranks) {
    if (r > d) throw std::invalid_argument("rank exceeds ambient dimension");
    std::vector<Eigen::Index> axes;
    for (Eigen::Index i = 0; i < r; ++i) axes.push_back(i);
    frames.push_back(levylab::Frame<Scalar>::coordinate(d, axes));
  }
  return frames;
}

void run_levy_sequence(const LevySequenceOpts& o) {
  const double eps = real_arg("eps", o.eps);
  const auto ranks = parse_rank_list(o.ranks);
  std::string artifact;
  std::string verdict;
  if (o.preset == "circle") {
    const auto frames = coordinate_prefix_frames<Complex>(o.d, ranks);
    levylab::Matrix<Complex> diag = levylab::Matrix<Complex>::Zero(o.d, o.d);
    for (Eigen::Index i = 0; i < o.d; ++i) {
      const double angle = std::sqrt(2.0) * static_cast<double>(i + 1);
      diag(i, i) = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<levylab::UnitaryAction<Complex>> actions{
        levylab::UnitaryAction<Complex>::scalar("id", Complex(1), o.d),
        levylab::UnitaryAction<Complex>::dense("circle", diag)};
    const auto rep = levylab::levy_sequence_experiment<Complex>(
        frames, actions, hemisphere_cover_for<Complex>(o.d), eps, o.samples, o.seed);
    artifact = rep.to_json() + "\n";
    verdict = levylab::verdict_name(rep.search.verdict);
  } else if (o.preset == "scalar" || o.preset == "identity") {
    const auto frames = coordinate_prefix_frames<double>(o.d, ranks);
    std::vector<levylab::UnitaryAction<double>> actions{
        levylab::UnitaryAction<double>::scalar("id", 1.0, o.d)};
    if (o.preset == "scalar")
      actions.push_back(levylab::UnitaryAction<double>::scalar("flip", -1.0, o.d));
    const auto rep = levylab::levy_sequence_experiment<double>(
        frames, actions, hemisphere_cover_for<double>(o.d), eps, o.samples, o.seed);
    artifact = rep.to_json() + "\n";
    verdict = levylab::verdict_name(rep.search.verdict);
  } else {
    throw std::invalid_argument("preset must be scalar, identity, or circle");
  }
  std::cerr << "search verdict: " << verdict << "\n";
  deliver(o.out, artifact);
}

struct HammingOpts {
  std::size_t n = 10;
  std::string out;
};

void run_hamming(const HammingOpts& o) {
  if (o.n < 4 || o.n % 2 != 0)
    throw std::invalid_argument("hamming: --n must be an even number >= 4");
  const levylab::Permutation sigma = levylab::pairwise_swap_all(o.n);
  const levylab::Permutation eta = levylab::pairwise_swap_tail(o.n);
  const levylab::Rational first = levylab::normalized_hamming(sigma, eta);
  const levylab::Rational second = levylab::normalized_hamming(sigma * eta, eta * eta);
  std::string text;
  text += "phi(sigma, eta) = " + first.str() + "\n";
  text += "phi(sigma*eta, eta^2) = " + second.str() + "\n";
  deliver(o.out, text);
}

// ---------------------------------------------------------------------------
// config pre-pass: `--config file` merges key = value entries as flags that
// explicit command-line flags override (last value wins).

std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;

  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const std::string config_sub = cfg.get("subcommand", "");
  std::vector<std::string> merged;
  std::size_t skip = 0;
  if (!rest.empty() && !rest.front().empty() && rest.front()[0] != '-') {
    if (!config_sub.empty() && config_sub != rest.front())
      throw std::invalid_argument("config names subcommand '" + config_sub +
                                  "' but the command line says '" + rest.front() + "'");
    merged.push_back(rest.front());
    skip = 1;
  } else if (!config_sub.empty()) {
    merged.push_back(config_sub);
  } else {
    throw std::invalid_argument("config file has no 'subcommand' key and none was given");
  }
  for (const auto& [key, value] : cfg.entries()) {
    if (key == "subcommand") continue;
    merged.push_back(value.empty() ? "--" + key : "--" + key + "=" + value);
  }
  for (std::size_t i = skip; i < rest.size(); ++i) merged.push_back(rest[i]);
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"levylab: concentration of measure, subspace proximity, and essential-set "
               "experiments on high-dimensional spheres"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto curve_flags = [](CLI::App* sub, CurveOpts& o, bool with_sampling) {
    sub->add_option("--n", o.n, "sphere dimension n (the sphere S^n in R^(n+1))");
    sub->add_option("--eps-max", o.eps_max, "largest epsilon on the grid (geodesic)");
    sub->add_option("--steps", o.steps, "grid points");
    if (with_sampling) {
      sub->add_option("--samples", o.samples, "Monte Carlo samples");
      sub->add_option("--seed", o.seed, "random seed");
    }
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", o.out, "artifact file (default: stdout)");
  };

  auto exact_opts = std::make_shared<CurveOpts>();
  auto* exact = app.add_subcommand("alpha-exact",
                                   "exact spherical-cap concentration function via quadrature");
  curve_flags(exact, *exact_opts, false);
  exact->callback([exact_opts] { run_alpha_exact(*exact_opts); });

  auto mc_opts = std::make_shared<CurveOpts>();
  auto* mc = app.add_subcommand("alpha-mc",
                                "Monte Carlo concentration function of the hemisphere");
  curve_flags(mc, *mc_opts, true);
  mc->callback([mc_opts] { run_alpha_mc(*mc_opts); });

  auto lb_opts = std::make_shared<LevyBoundOpts>();
  auto* lb = app.add_subcommand("levy-bound", "Gaussian concentration bound sqrt(pi/8) exp(-eps^2 n/2)");
  lb->add_option("--n", lb_opts->n, "sphere dimension n");
  lb->add_option("--eps", lb_opts->eps, "epsilon for the single-value form");
  lb->add_option("--eps-max", lb_opts->eps_max, "largest epsilon for the curve form");
  lb->add_option("--steps", lb_opts->steps, "grid points (0 = print a single value)");
  lb->add_option("--format", lb_opts->format, "csv or json (curve form)")
      ->check(CLI::IsMember({"csv", "json"}));
  lb->add_option("--out", lb_opts->out, "artifact file (default: stdout)");
  lb->callback([lb_opts] { run_levy_bound(*lb_opts); });

  auto frame_flags = [](CLI::App* sub, FrameOpts& o, bool with_pairs, bool with_eps,
                        bool with_files) {
    sub->add_option("--d", o.d, "ambient dimension");
    sub->add_option("--rank", o.rank, "subspace rank");
    if (with_pairs) {
      sub->add_option("--pairs", o.pairs, "random frame pairs");
      sub->add_option("--samples", o.samples, "unit samples per pair");
    }
    if (with_eps) {
      sub->add_option("--eps", o.eps, "chordal radius");
      sub->add_option("--samples", o.samples, "Monte Carlo samples");
    }
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_flag("--complex", o.complex_field, "use complex scalars");
    if (with_files) {
      sub->add_option("--left", o.left, "CSV file for the first frame");
      sub->add_option("--right", o.right, "CSV file for the second frame");
    }
    sub->add_option("--out", o.out, "artifact file (default: stdout)");
  };

  auto angles_opts = std::make_shared<FrameOpts>();
  auto* angles = app.add_subcommand("angles", "principal angles between two equal-rank subspaces");
  frame_flags(angles, *angles_opts, false, false, true);
  angles->callback([angles_opts] { run_angles(*angles_opts); });

  auto iso_opts = std::make_shared<FrameOpts>();
  auto* iso = app.add_subcommand("isometry-check",
                                 "verify ||r(x) - x|| <= sqrt2 dist(x, H2) on random pairs");
  frame_flags(iso, *iso_opts, true, false, false);
  iso->callback([iso_opts] { run_isometry_check(*iso_opts); });

  auto prox_opts = std::make_shared<FrameOpts>();
  prox_opts->samples = 20000;
  auto* prox = app.add_subcommand("proximity",
                                  "mass of a sub-sphere within eps of another subspace");
  frame_flags(prox, *prox_opts, false, true, false);
  prox->callback([prox_opts] { run_proximity(*prox_opts); });

  auto leader_opts = std::make_shared<LeaderOpts>();
  auto* leader = app.add_subcommand("leader",
                                    "three-block mask cover: certificates plus witness search");
  leader->add_option("--d", leader_opts->d, "ambient dimension (multiple of 3)");
  leader->add_option("--eps", leader_opts->eps, "chordal radius");
  leader->add_option("--budget", leader_opts->budget, "witness search samples");
  leader->add_option("--seed", leader_opts->seed, "random seed");
  leader->add_option("--out", leader_opts->out, "artifact file (default: stdout)");
  leader->callback([leader_opts] { run_leader(*leader_opts); });

  auto f2_opts = std::make_shared<F2Opts>();
  auto* f2 = app.add_subcommand("f2", "free-group ball experiment: low/high mass sets and shifts");
  f2->add_option("--radius", f2_opts->radius, "ball radius of the universe");
  f2->add_option("--eps", f2_opts->eps, "chordal radius (fractions like 1/12 accepted)");
  f2->add_option("--k", f2_opts->k, "number of inverse-generator shifts");
  f2->add_option("--samples", f2_opts->samples, "samples / search budget");
  f2->add_option("--seed", f2_opts->seed, "random seed");
  f2->add_option("--out", f2_opts->out, "artifact file (default: stdout)");
  f2->callback([f2_opts] { run_f2(*f2_opts); });

  auto lift_opts = std::make_shared<LiftOpts>();
  auto* lift = app.add_subcommand("lift-cover",
                                  "lift hemisphere covers to the direct sum and check margins");
  lift->add_option("--d1", lift_opts->d1, "first factor dimension");
  lift->add_option("--d2", lift_opts->d2, "second factor dimension");
  lift->add_option("--eps", lift_opts->eps, "base inessentiality radius");
  lift->add_option("--samples", lift_opts->samples, "covering-check samples");
  lift->add_option("--seed", lift_opts->seed, "random seed");
  lift->add_option("--out", lift_opts->out, "artifact file (default: stdout)");
  lift->callback([lift_opts] { run_lift_cover(*lift_opts); });

  auto scan_opts = std::make_shared<ScanOpts>();
  auto* scan = app.add_subcommand("scan", "witness search across every element of a cover");
  scan->add_option("--preset", scan_opts->preset, "leader or hemispheres")
      ->check(CLI::IsMember({"leader", "hemispheres"}));
  scan->add_option("--d", scan_opts->d, "ambient dimension");
  scan->add_option("--eps", scan_opts->eps, "chordal radius");
  scan->add_option("--budget", scan_opts->budget, "witness search samples per element");
  scan->add_option("--seed", scan_opts->seed, "random seed");
  scan->add_option("--out", scan_opts->out, "artifact file (default: stdout)");
  scan->callback([scan_opts] { run_scan(*scan_opts); });

  auto ai_opts = std::make_shared<AlmostInvariantOpts>();
  auto* ai = app.add_subcommand("almost-invariant",
                                "best almost-invariant unit vector of an action family");
  ai->add_option("--family", ai_opts->family, "cyclic, scalar, or f2")
      ->check(CLI::IsMember({"cyclic", "scalar", "f2"}));
  ai->add_option("--d", ai_opts->d, "dimension (cyclic and scalar families)");
  ai->add_option("--radius", ai_opts->radius, "universe ball radius (f2 family)");
  ai->add_option("--support-radius", ai_opts->support_radius,
                 "support ball radius (f2 family, default radius - 1)");
  ai->add_flag("--complex", ai_opts->complex_field, "use complex scalars");
  ai->add_option("--out", ai_opts->out, "artifact file (default: stdout)");
  ai->callback([ai_opts] { run_almost_invariant(*ai_opts); });

  auto folner_opts = std::make_shared<FolnerOpts>();
  auto* folner = app.add_subcommand("folner",
                                    "subset search minimizing max |gS (delta) S| / |S|");
  folner->add_option("--family", folner_opts->family, "shift, identity, or f2")
      ->check(CLI::IsMember({"shift", "identity", "f2"}));
  folner->add_option("--d", folner_opts->d, "universe size (shift and identity families)");
  folner->add_option("--n", folner_opts->n, "subset rank");
  folner->add_option("--strategy", folner_opts->strategy, "greedy or exhaustive")
      ->check(CLI::IsMember({"greedy", "exhaustive"}));
  folner->add_option("--restarts", folner_opts->restarts, "greedy restarts");
  folner->add_option("--universe-radius", folner_opts->universe_radius,
                     "ball radius of the universe (f2 family)");
  folner->add_option("--pool-radius", folner_opts->pool_radius,
                     "candidate indices come from this ball (f2 family)");
  folner->add_option("--seed", folner_opts->seed, "random seed");
  folner->add_option("--out", folner_opts->out, "artifact file (default: stdout)");
  folner->callback([folner_opts] { run_folner(*folner_opts); });

  auto seq_opts = std::make_shared<LevySequenceOpts>();
  auto* seq = app.add_subcommand("levy-sequence",
                                 "probe a growing projection sequence against a cover");
  seq->add_option("--preset", seq_opts->preset, "scalar, identity, or circle")
      ->check(CLI::IsMember({"scalar", "identity", "circle"}));
  seq->add_option("--d", seq_opts->d, "ambient dimension");
  seq->add_option("--ranks", seq_opts->ranks, "comma-separated increasing ranks");
  seq->add_option("--eps", seq_opts->eps, "base radius (search runs at 2 eps)");
  seq->add_option("--samples", seq_opts->samples, "measure samples / search budget");
  seq->add_option("--seed", seq_opts->seed, "random seed");
  seq->add_option("--out", seq_opts->out, "artifact file (default: stdout)");
  seq->callback([seq_opts] { run_levy_sequence(*seq_opts); });

  auto ham_opts = std::make_shared<HammingOpts>();
  auto* ham = app.add_subcommand("hamming",
                                 "normalized Hamming ratios of the canonical permutation pair");
  ham->add_option("--n", ham_opts->n, "symmetric group degree (even, >= 4)");
  ham->add_option("--out", ham_opts->out, "artifact file (default: stdout)");
  ham->callback([ham_opts] { run_hamming(*ham_opts); });

  try {
    std::vector<std::string> args = apply_config({argv + 1, argv + argc});
    std::vector<std::string> tokens;
    tokens.emplace_back(argv[0]);
    for (auto& a : args) tokens.push_back(std::move(a));
    std::vector<char*> raw;
    raw.reserve(tokens.size());
    for (auto& t : tokens) raw.push_back(t.data());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const levylab::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
