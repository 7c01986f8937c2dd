#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "levylab/action.hpp"
#include "levylab/folner.hpp"
#include "levylab/rng.hpp"
#include "levylab/spherical_set.hpp"
#include "levylab/subspace.hpp"
#include "levylab/words.hpp"

using namespace levylab;

namespace {

// Parses one restart summary "restart r: grown G -> swaps k -> F" into (G, F).
std::pair<long, long> grown_and_final(const std::string& s) {
  const auto g = s.find("grown ");
  const auto last = s.rfind("-> ");
  REQUIRE(g != std::string::npos);
  REQUIRE(last != std::string::npos);
  return {std::stol(s.substr(g + 6)), std::stol(s.substr(last + 3))};
}

// Applies left translation by g to a coefficient vector on a word ball,
// independently of the action machinery: move each coefficient from w to gw.
Vector<double> translate_on_ball(const ReducedWord& g, const BallIndex& universe,
                                 const Vector<double>& f) {
  Vector<double> out = Vector<double>::Zero(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    const std::size_t t = universe.find(g * universe.words()[static_cast<std::size_t>(i)]);
    REQUIRE(t != BallIndex::npos);
    out[static_cast<Eigen::Index>(t)] = f[i];
  }
  return out;
}

}  // namespace

TEST_CASE("cyclic shift admits an exactly invariant unit vector") {
  const Eigen::Index d = 16;
  const auto real = almost_invariant_vector<double>({cyclic_shift_action<double>(d)});
  CHECK(real.residual < 1e-8);
  CHECK(real.top_eigenvalue == Catch::Approx(1.0).margin(1e-12));
  CHECK(real.support_dim == d);
  REQUIRE(real.per_action.size() == 1);
  CHECK(real.action_labels[0] == "shift");
  CHECK(real.per_action[0] == real.residual);
  // The invariant line of the shift is the span of the uniform vector, and
  // the phase convention makes the representative entrywise positive.
  for (Eigen::Index i = 0; i < d; ++i)
    CHECK(real.xi[i] == Catch::Approx(1.0 / std::sqrt(static_cast<double>(d))).margin(1e-8));

  using C = std::complex<double>;
  const auto complex_case = almost_invariant_vector<C>({cyclic_shift_action<C>(d)});
  CHECK(complex_case.residual < 1e-8);
  for (Eigen::Index i = 0; i < d; ++i)
    CHECK(std::abs(complex_case.xi[i]) ==
          Catch::Approx(1.0 / std::sqrt(static_cast<double>(d))).margin(1e-8));
}

TEST_CASE("the sign flip pushes every unit vector to the antipode") {
  const auto r = almost_invariant_vector<double>({UnitaryAction<double>::scalar("-I", -1.0, 8)});
  CHECK(r.residual == Catch::Approx(2.0).margin(1e-12));
  CHECK(r.top_eigenvalue == Catch::Approx(-1.0).margin(1e-12));
  CHECK(r.averaged_residual == Catch::Approx(2.0).margin(1e-12));
  CHECK(r.xi.norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("free-group almost-invariant vector matches a word-level oracle") {
  const std::size_t radius = 3;
  const BallIndex universe(radius);
  const Eigen::Index n = static_cast<Eigen::Index>(universe.size());
  const Eigen::Index s = static_cast<Eigen::Index>(ball_size(radius - 1));
  const std::vector<UnitaryAction<double>> actions{regular_action<double>(word_a(), universe),
                                                   regular_action<double>(word_b(), universe)};

  const auto result = almost_invariant_vector<double>(actions, s);
  CHECK(result.support_dim == s);
  CHECK(result.xi.size() == n);
  CHECK(result.xi.tail(n - s).norm() == 0.0);

  // Oracle: rebuild the averaged operator from word arithmetic alone.  Entry
  // (j, i) of the translation matrix is 1 exactly when g w_i = w_j, and the
  // support corner keeps rows and columns below s.
  Matrix<double> averaged = Matrix<double>::Zero(s, s);
  for (const ReducedWord& g : {word_a(), word_b()}) {
    Matrix<double> t = Matrix<double>::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
      const std::size_t j = universe.find(g * universe.words()[static_cast<std::size_t>(i)]);
      REQUIRE(j != BallIndex::npos);
      if (static_cast<Eigen::Index>(j) < s) t(static_cast<Eigen::Index>(j), i) = 1.0;
    }
    averaged += t + t.transpose();
  }
  averaged /= 4.0;
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(averaged);
  CHECK(result.top_eigenvalue == Catch::Approx(es.eigenvalues()(s - 1)).margin(1e-12));

  // Residuals recomputed by moving coefficients between words directly.
  REQUIRE(result.per_action.size() == 2);
  const Vector<double> xi = result.xi;
  const std::vector<ReducedWord> gens{word_a(), word_b()};
  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    const double oracle = (translate_on_ball(gens[gi], universe, xi) - xi).norm();
    CHECK(result.per_action[gi] == Catch::Approx(oracle).margin(1e-12));
  }

  // The max residual dominates the quadratic mean, which equals
  // sqrt(2 - 2 lambda) identically.
  double mean_sq = 0.0;
  for (double r : result.per_action) mean_sq += r * r;
  mean_sq /= static_cast<double>(result.per_action.size());
  CHECK(mean_sq == Catch::Approx(2.0 - 2.0 * result.top_eigenvalue).margin(1e-10));
  CHECK(result.residual >= result.averaged_residual - 1e-10);
}

TEST_CASE("almost-invariant vector rejects malformed families") {
  CHECK_THROWS_AS(almost_invariant_vector<double>({}), std::invalid_argument);
  const std::vector<UnitaryAction<double>> mixed{cyclic_shift_action<double>(4),
                                                 cyclic_shift_action<double>(5)};
  CHECK_THROWS_AS(almost_invariant_vector<double>(mixed), std::invalid_argument);
  const std::vector<UnitaryAction<double>> one{cyclic_shift_action<double>(4)};
  CHECK_THROWS_AS(almost_invariant_vector<double>(one, 0), std::invalid_argument);
  CHECK_THROWS_AS(almost_invariant_vector<double>(one, 5), std::invalid_argument);
}

TEST_CASE("subset symmetric differences count exactly") {
  const IndexMap shift = cyclic_shift_map(10);
  CHECK(subset_commutator_count({3, 4, 5, 6}, shift) == 2);
  CHECK(subset_commutator_count({0, 2, 4}, shift) == 6);
  CHECK(subset_commutator_count({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, shift) == 0);
  // Wrap-around intervals are still intervals for the cyclic shift.
  CHECK(subset_commutator_count({8, 9, 0, 1}, shift) == 2);

  const IndexMap id = index_map_from_permutation("id", Permutation::identity(10));
  CHECK(subset_commutator_count({1, 5, 9}, id) == 0);

  CHECK_THROWS_AS(subset_commutator_count({11}, shift), std::invalid_argument);
}

TEST_CASE("word index maps are partial at the universe boundary") {
  const BallIndex universe(2);
  const IndexMap ma = word_index_map(word_a(), universe);
  CHECK(ma.label == "a");
  CHECK(ma.size() == static_cast<Eigen::Index>(universe.size()));

  // a * e = a stays inside; a * aa = aaa leaves the radius-2 ball.
  const Eigen::Index idx_e = static_cast<Eigen::Index>(universe.find(ReducedWord{}));
  const Eigen::Index idx_aa =
      static_cast<Eigen::Index>(universe.find(word_a() * word_a()));
  CHECK(ma.image[static_cast<std::size_t>(idx_e)] ==
        static_cast<Eigen::Index>(universe.find(word_a())));
  CHECK(ma.image[static_cast<std::size_t>(idx_aa)] == IndexMap::kNoImage);
  CHECK_THROWS_AS(subset_commutator_count({idx_aa}, ma), SupportViolationError);
}

TEST_CASE("shift subsets of rank twenty settle at ratio one tenth") {
  const std::vector<IndexMap> maps{cyclic_shift_map(100)};
  const auto r = folner_subset_search(maps, 20, FolnerStrategy::GreedySwap, {}, 32, 7);
  CHECK(r.rank == 20);
  REQUIRE(r.symmetric_differences.size() == 1);
  CHECK(r.symmetric_differences[0] == 2);
  CHECK(r.max_ratio == 2.0 / 20.0);
  CHECK(r.strategy == "greedy-swap");
  CHECK(std::is_sorted(r.subset.begin(), r.subset.end()));

  // Reported ratios must agree with an independent recount.
  CHECK(subset_commutator_count(r.subset, maps[0]) == r.symmetric_differences[0]);

  // Identical inputs reproduce the identical search transcript.
  const auto again = folner_subset_search(maps, 20, FolnerStrategy::GreedySwap, {}, 32, 7);
  CHECK(again.subset == r.subset);
  CHECK(again.trace == r.trace);
  CHECK(again.evaluations == r.evaluations);
}

TEST_CASE("greedy descent never worsens its grown start") {
  const BallIndex universe(3);
  const std::vector<IndexMap> maps{word_index_map(word_a(), universe),
                                   word_index_map(word_b(), universe)};
  std::vector<Eigen::Index> pool;
  for (std::size_t i = 0; i < ball_size(2); ++i) pool.push_back(static_cast<Eigen::Index>(i));
  const auto r = folner_subset_search(maps, 5, FolnerStrategy::GreedySwap, pool, 16, 3);
  REQUIRE(r.trace.size() == 1);
  std::size_t restarts_seen = 0;
  std::string::size_type from = 0;
  const std::string& t = r.trace[0];
  while (from < t.size()) {
    auto next = t.find("; ", from);
    const std::string one = t.substr(from, next == std::string::npos ? next : next - from);
    const auto [grown, final_obj] = grown_and_final(one);
    CHECK(final_obj <= grown);
    ++restarts_seen;
    if (next == std::string::npos) break;
    from = next + 2;
  }
  CHECK(restarts_seen == 16);
  for (Eigen::Index i : r.subset) CHECK(i < static_cast<Eigen::Index>(ball_size(2)));
}

TEST_CASE("exhaustive search visits every subset and matches greedy on small free-group balls") {
  const std::vector<IndexMap> maps{cyclic_shift_map(30)};
  const auto small = folner_subset_search(maps, 3, FolnerStrategy::Exhaustive);
  CHECK(small.evaluations == 4060);  // 30 choose 3
  CHECK(small.symmetric_differences[0] == 2);
  CHECK(small.max_ratio == 2.0 / 3.0);

  const BallIndex universe(3);
  const std::vector<IndexMap> wmaps{word_index_map(word_a(), universe),
                                    word_index_map(word_b(), universe)};
  std::vector<Eigen::Index> pool;
  for (std::size_t i = 0; i < ball_size(2); ++i) pool.push_back(static_cast<Eigen::Index>(i));

  const auto exact = folner_subset_search(wmaps, 4, FolnerStrategy::Exhaustive, pool);
  const auto greedy = folner_subset_search(wmaps, 4, FolnerStrategy::GreedySwap, pool, 32, 11);
  CHECK(exact.evaluations == 2380);  // 17 choose 4
  CHECK(greedy.max_ratio == exact.max_ratio);
}

TEST_CASE("subset search validates its inputs and its budget") {
  const std::vector<IndexMap> maps{cyclic_shift_map(100)};
  CHECK_THROWS_AS(folner_subset_search(maps, 20, FolnerStrategy::Exhaustive), ResourceLimitError);
  CHECK_THROWS_AS(folner_subset_search({}, 3, FolnerStrategy::GreedySwap), std::invalid_argument);
  CHECK_THROWS_AS(folner_subset_search(maps, 0, FolnerStrategy::GreedySwap), std::invalid_argument);
  CHECK_THROWS_AS(folner_subset_search(maps, 101, FolnerStrategy::GreedySwap),
                  std::invalid_argument);
  CHECK_THROWS_AS(folner_subset_search(maps, 3, FolnerStrategy::GreedySwap, {0, 1, 200}),
                  std::invalid_argument);
  CHECK_THROWS_AS(folner_subset_search(maps, 3, FolnerStrategy::GreedySwap, {}, 0),
                  std::invalid_argument);

  // A pool on which some generator is undefined everywhere has no feasible
  // subset, for either strategy.
  const BallIndex universe(2);
  const std::vector<IndexMap> wmaps{word_index_map(word_a(), universe)};
  const Eigen::Index idx_aa = static_cast<Eigen::Index>(universe.find(word_a() * word_a()));
  CHECK_THROWS_AS(folner_subset_search(wmaps, 1, FolnerStrategy::Exhaustive, {idx_aa}),
                  std::invalid_argument);
  CHECK_THROWS_AS(folner_subset_search(wmaps, 1, FolnerStrategy::GreedySwap, {idx_aa}, 4),
                  std::invalid_argument);
}

TEST_CASE("dense and combinatorial commutator routes agree on coordinate projections") {
  const Eigen::Index d = 12;
  RandomStream rng = RandomStream::for_sample(99, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // Random permutation by sorting random keys, random subset of size 4.
    std::vector<std::size_t> perm(d);
    for (Eigen::Index i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.next_below(i)]);
    std::vector<Eigen::Index> subset;
    while (subset.size() < 4) {
      const Eigen::Index c = static_cast<Eigen::Index>(rng.next_below(d));
      if (std::find(subset.begin(), subset.end(), c) == subset.end()) subset.push_back(c);
    }
    std::sort(subset.begin(), subset.end());

    const Permutation p(perm);
    const auto action = permutation_action<double>("p", p);
    const IndexMap map = index_map_from_permutation("p", p);
    const double dense = trace_commutator(Frame<double>::coordinate(d, subset), action);
    const std::size_t exact = trace_commutator(subset, map);
    CHECK(dense == Catch::Approx(static_cast<double>(exact)).margin(1e-8));
  }
}

TEST_CASE("commutator routes on the small shift and on commuting data") {
  const auto shift5 = cyclic_shift_action<double>(5);
  const std::vector<Eigen::Index> s{0, 1};
  CHECK(trace_commutator(s, cyclic_shift_map(5)) == 2);
  CHECK(trace_commutator(Frame<double>::coordinate(5, s), shift5) ==
        Catch::Approx(2.0).margin(1e-9));

  // A shift-invariant subset commutes exactly.
  std::vector<Eigen::Index> all{0, 1, 2, 3, 4};
  CHECK(trace_commutator(all, cyclic_shift_map(5)) == 0);
  CHECK(trace_commutator(Frame<double>::coordinate(5, all), shift5) ==
        Catch::Approx(0.0).margin(1e-9));

  // A dense rotation against a rank-3 projection stays within the trace-norm
  // range [0, 2 * rank].
  const auto u = UnitaryAction<double>::dense("u", haar_unitary<double>(12, 5));
  const Frame<double> f = random_frame<double>(12, 3, 6);
  const double t = trace_commutator(f, u);
  CHECK(t >= 0.0);
  CHECK(t <= 6.0 + 1e-9);

  CHECK_THROWS_AS(trace_commutator(Frame<double>::coordinate(4, {0}), shift5),
                  std::invalid_argument);
}

TEST_CASE("projection sequence pipeline finds a doubled-radius witness") {
  const Eigen::Index d = 12;
  std::vector<Frame<double>> frames;
  for (Eigen::Index r : {4, 6, 8}) {
    std::vector<Eigen::Index> axes;
    for (Eigen::Index i = 0; i < r; ++i) axes.push_back(i);
    frames.push_back(Frame<double>::coordinate(d, axes));
  }
  const std::vector<UnitaryAction<double>> actions{
      UnitaryAction<double>::scalar("id", 1.0, d), UnitaryAction<double>::scalar("flip", -1.0, d)};
  Vector<double> e1 = Vector<double>::Zero(d);
  e1[0] = 1.0;
  Cover<double> gamma;
  gamma.sets.push_back(cap_set<double>("north", e1, kPi / 2.0));
  gamma.sets.push_back(cap_set<double>("south", Vector<double>(-e1), kPi / 2.0));

  const double eps = 0.1;
  const auto report = levy_sequence_experiment<double>(frames, actions, gamma, eps, 4000, 17);

  CHECK(report.ranks == std::vector<Eigen::Index>{4, 6, 8});
  CHECK(report.action_labels == std::vector<std::string>{"id", "flip"});
  // Scalars commute with every projection.
  for (const auto& row : report.commutator_ratios)
    for (double v : row) CHECK(v == Catch::Approx(0.0).margin(1e-12));
  CHECK(report.ratios_decreasing);

  // Hemisphere measures hover near one half on every sub-sphere.
  for (const auto& row : report.element_measures) {
    REQUIRE(row.size() == 2);
    CHECK(std::abs(row[0] - 0.5) < 0.05);
    CHECK(std::abs(row[1] - 0.5) < 0.05);
  }

  // Scalar actions preserve the top subspace, so nothing moves in transport.
  for (double t : report.transport_displacements) CHECK(t < 1e-8);

  // The two hemispheres of the chosen element meet within the doubled radius;
  // re-verify the witness against independently rebuilt transformed sets.
  REQUIRE(report.search.verdict == Verdict::WitnessFound);
  CHECK(report.search.epsilon == 2.0 * eps);
  REQUIRE(report.search.witness.has_value());
  const auto& chosen = gamma.sets[report.chosen_element];
  for (const auto& g : actions) {
    const auto moved = transformed_set(g, chosen);
    CHECK(moved.distance_upper(*report.search.witness) < 2.0 * eps);
  }
  CHECK(report.search.witness->norm() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("projection sequence tie-breaks toward the first qualifying element") {
  const Eigen::Index d = 6;
  std::vector<Frame<double>> frames{Frame<double>::coordinate(d, {0, 1}),
                                    Frame<double>::coordinate(d, {0, 1, 2})};
  const std::vector<UnitaryAction<double>> actions{UnitaryAction<double>::scalar("id", 1.0, d)};
  Cover<double> gamma;
  gamma.sets.push_back(whole_sphere<double>(d));
  gamma.sets[0].label = "first";
  gamma.sets.push_back(whole_sphere<double>(d));
  gamma.sets[1].label = "second";

  const auto report = levy_sequence_experiment<double>(frames, actions, gamma, 0.2, 500, 5);
  CHECK(report.qualifying_counts == std::vector<std::size_t>{2, 2});
  CHECK(report.chosen_element == 0);
  CHECK(report.search.verdict == Verdict::WitnessFound);
}

TEST_CASE("projection sequence reports growing conjugation ratios honestly") {
  const Eigen::Index d = 8;
  std::vector<std::size_t> half_swap(d);
  for (Eigen::Index i = 0; i < d; ++i) half_swap[static_cast<std::size_t>(i)] = (i + 4) % 8;
  const auto swap_action = permutation_action<double>("swap", Permutation(half_swap));

  // span{e0, e4} is swap-invariant; span{e0..e3} is carried onto its
  // orthogonal complement, so the ratio jumps from 0 to 2.
  std::vector<Frame<double>> frames{Frame<double>::coordinate(d, {0, 4}),
                                    Frame<double>::coordinate(d, {0, 1, 2, 3})};
  Cover<double> gamma;
  gamma.sets.push_back(whole_sphere<double>(d));

  const auto report =
      levy_sequence_experiment<double>(frames, {swap_action}, gamma, 0.1, 400, 2);
  REQUIRE(report.commutator_ratios.size() == 2);
  CHECK(report.commutator_ratios[0][0] == Catch::Approx(0.0).margin(1e-9));
  CHECK(report.commutator_ratios[1][0] == Catch::Approx(2.0).margin(1e-9));
  CHECK_FALSE(report.ratios_decreasing);

  // The transported image sphere is orthogonal to the top sub-sphere, so
  // every probe moves by exactly sqrt(2).
  REQUIRE(report.transport_displacements.size() == 1);
  CHECK(report.transport_displacements[0] == Catch::Approx(std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("projection sequence validates its inputs") {
  const Eigen::Index d = 6;
  const Frame<double> f2 = Frame<double>::coordinate(d, {0, 1});
  const Frame<double> f3 = Frame<double>::coordinate(d, {0, 1, 2});
  const std::vector<UnitaryAction<double>> id{UnitaryAction<double>::scalar("id", 1.0, d)};
  Cover<double> gamma;
  gamma.sets.push_back(whole_sphere<double>(d));

  CHECK_THROWS_AS(levy_sequence_experiment<double>({}, id, gamma, 0.1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f3, f2}, id, gamma, 0.1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f2, f2}, id, gamma, 0.1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f2, f3}, id, gamma, 0.0, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f2, f3}, {}, gamma, 0.1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f2, f3}, id, Cover<double>{}, 0.1, 10, 0),
                  std::invalid_argument);
  const std::vector<UnitaryAction<double>> wrong{UnitaryAction<double>::scalar("id", 1.0, 7)};
  CHECK_THROWS_AS(levy_sequence_experiment<double>({f2, f3}, wrong, gamma, 0.1, 10, 0),
                  std::invalid_argument);
}

TEST_CASE("search and sequence artifacts parse as JSON with stable keys") {
  const std::vector<IndexMap> maps{cyclic_shift_map(20)};
  const auto folner = folner_subset_search(maps, 4, FolnerStrategy::Exhaustive);
  const auto fj = nlohmann::json::parse(folner.to_json());
  CHECK(fj["rank"] == 4);
  CHECK(fj["strategy"] == "exhaustive");
  CHECK(fj["subset"].is_array());
  CHECK(fj["ratios"].contains("shift"));
  CHECK(fj["max_ratio"].get<double>() == folner.max_ratio);

  const auto invariant = almost_invariant_vector<double>({cyclic_shift_action<double>(6)});
  const auto ij = nlohmann::json::parse(invariant.to_json());
  CHECK(ij["dimension"] == 6);
  CHECK(ij["support_dim"] == 6);
  CHECK(ij["per_action"].contains("shift"));

  const Eigen::Index d = 6;
  Cover<double> gamma;
  gamma.sets.push_back(whole_sphere<double>(d));
  const auto report = levy_sequence_experiment<double>(
      {Frame<double>::coordinate(d, {0, 1}), Frame<double>::coordinate(d, {0, 1, 2})},
      {UnitaryAction<double>::scalar("id", 1.0, d)}, gamma, 0.1, 200, 1);
  const auto rj = nlohmann::json::parse(report.to_json());
  CHECK(rj["ranks"] == nlohmann::json::array({2, 3}));
  CHECK(rj["chosen_element"] == "sphere");
  CHECK(rj["search"]["verdict"] == "witness-found");
  CHECK(rj["ratios_decreasing"].is_boolean());
}
