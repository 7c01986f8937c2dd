#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "levylab/action.hpp"
#include "levylab/dynamics.hpp"
#include "levylab/rng.hpp"
#include "levylab/sphere.hpp"
#include "levylab/spherical_set.hpp"
#include "levylab/subspace.hpp"

using namespace levylab;

namespace {

Vector<double> axis(Eigen::Index d, Eigen::Index i, double sign = 1.0) {
  Vector<double> e = Vector<double>::Zero(d);
  e[i] = sign;
  return e;
}

}  // namespace

TEST_CASE("verdict names are fixed strings") {
  CHECK(verdict_name(Verdict::WitnessFound) == "witness-found");
  CHECK(verdict_name(Verdict::CertificateEmpty) == "certificate-empty");
  CHECK(verdict_name(Verdict::Inconclusive) == "inconclusive");
}

TEST_CASE("pullback images of caps coincide with directly rotated caps") {
  const Eigen::Index d = 6;
  const Matrix<double> u = haar_unitary<double>(d, 31);
  const auto g = UnitaryAction<double>::dense("g", u);
  const Vector<double> center = axis(d, 0);
  const double radius = kPi / 3.0;
  const auto a = cap_set<double>("cap", center, radius);

  const auto image = transformed_set(g, a);
  CHECK(image.label == "g(cap)");
  const auto direct = cap_set<double>("rot", Vector<double>(u * center), radius);

  RandomStream rng = RandomStream::for_sample(77, 0);
  for (int i = 0; i < 300; ++i) {
    const Vector<double> y = unit_sphere_point<double>(d, rng);
    CHECK(image.chordal_distance(y) == Catch::Approx(direct.chordal_distance(y)).margin(1e-12));
    CHECK(image.member(y) == direct.member(y));
  }

  const auto partial = regular_action<double>(word_a(), BallIndex(2));
  const auto bad = cap_set<double>("c", axis(partial.dimension(), 0), 1.0);
  CHECK_THROWS_AS(transformed_set(partial, bad), std::invalid_argument);
  CHECK_THROWS_AS(transformed_set(g, cap_set<double>("c", axis(4, 0), 1.0)),
                  std::invalid_argument);
}

TEST_CASE("sampled witness clouds upper-bound the exact distance") {
  const Eigen::Index d = 5;
  const auto exact = cap_set<double>("cap", axis(d, 0), kPi / 4.0);
  SphericalSet<double> opaque;
  opaque.label = "opaque";
  opaque.dimension = d;
  opaque.member = exact.member;  // same set, but no distance evaluator
  opaque.build_witness_cloud(20000, 9, 2000);

  RandomStream rng = RandomStream::for_sample(13, 0);
  for (int i = 0; i < 200; ++i) {
    const Vector<double> y = unit_sphere_point<double>(d, rng);
    const double upper = opaque.distance_upper(y);
    CHECK(upper >= exact.chordal_distance(y) - 1e-12);
    if (exact.member(y)) CHECK(upper == 0.0);
  }
}

TEST_CASE("witness search finds a member point under the identity transform") {
  const Eigen::Index d = 10;
  const auto a = cap_set<double>("cap", axis(d, 0), kPi / 4.0);
  const std::vector<UnitaryAction<double>> id{UnitaryAction<double>::scalar("id", 1.0, d)};

  const auto report = witness_search<double>(a, id, 0.1, d, 2000, 3);
  REQUIRE(report.verdict == Verdict::WitnessFound);
  REQUIRE(report.witness.has_value());
  CHECK(report.margin < 0.1);
  CHECK(a.chordal_distance(*report.witness) < 0.1);
  CHECK(report.witness->norm() == Catch::Approx(1.0).margin(1e-9));
  CHECK(report.transforms == std::vector<std::string>{"id"});
  CHECK(report.label == "cap");
}

TEST_CASE("witness search meets antipodal hemispheres at the equator") {
  const Eigen::Index d = 11;
  const auto a = cap_set<double>("north", axis(d, 0), kPi / 2.0);
  const std::vector<UnitaryAction<double>> transforms{
      UnitaryAction<double>::scalar("id", 1.0, d), UnitaryAction<double>::scalar("flip", -1.0, d)};

  const double eps = 0.1;
  const auto report = witness_search<double>(a, transforms, eps, d, 4000, 21);
  REQUIRE(report.verdict == Verdict::WitnessFound);
  const Vector<double>& w = *report.witness;
  // Both hemispheres within 0.1 pins the first coordinate to a thin
  // equatorial band.
  CHECK(a.chordal_distance(w) < eps);
  CHECK(transformed_set(transforms[1], a).chordal_distance(w) < eps);
  CHECK(std::abs(w[0]) < 0.15);
}

TEST_CASE("witness search validates inputs") {
  const Eigen::Index d = 5;
  const auto a = cap_set<double>("cap", axis(d, 0), 1.0);
  const std::vector<UnitaryAction<double>> id{UnitaryAction<double>::scalar("id", 1.0, d)};
  CHECK_THROWS_AS(witness_search<double>(a, {}, 0.1, d, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(witness_search<double>(a, id, 0.0, d, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(witness_search<double>(a, id, 0.1, 6, 100, 0), std::invalid_argument);
}

TEST_CASE("three-block families are analytically empty below the mass gap") {
  const double threshold = std::sqrt(2.0) / 2.0 - std::sqrt(3.0) / 3.0;

  // The degenerate three-coordinate case carries the same certificate.
  for (Eigen::Index d : {3, 30}) {
    const auto reports = leader_experiment<double>(d, 0.05, 400, 5);
    for (const auto& rep : reports) {
      CHECK(rep.verdict == Verdict::CertificateEmpty);
      CHECK_FALSE(rep.certificate.empty());
      CHECK(rep.epsilon == 0.05);
      CHECK(rep.samples > 0);  // the falsification search still ran
    }
    CHECK(reports[0].label == "A");
    CHECK(reports[1].label == "B");
    CHECK(reports[0].transforms ==
          std::vector<std::string>{"E->E1", "E->E2", "E->E3"});
    CHECK(reports[1].transforms ==
          std::vector<std::string>{"Ec->E1", "Ec->E2", "Ec->E3"});
  }

  // Between the Lipschitz gap and the true geometric gap no certificate is
  // issued, and no witness exists to be found: the best reachable point has
  // all three block masses equal, at chordal distance about 0.1698.
  const double empty_radius =
      2.0 * std::sin(0.5 * (std::acos(std::sqrt(3.0) / 3.0) - kPi / 4.0));
  REQUIRE(threshold < 0.14);
  REQUIRE(0.14 < empty_radius);
  const auto grey = leader_experiment<double>(300, 0.14, 2000, 7);
  for (const auto& rep : grey) {
    CHECK(rep.verdict == Verdict::Inconclusive);
    CHECK(rep.certificate.empty());
    CHECK(rep.margin >= empty_radius - 1e-9);
  }

  // Above the geometric gap the falsification search actually succeeds.
  const auto wide = leader_experiment<double>(300, 0.25, 2000, 9);
  const auto masks = leader_families<double>(300);
  for (const auto& rep : wide) {
    REQUIRE(rep.verdict == Verdict::WitnessFound);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.margin < 0.25);
    for (const auto& s : masks[0].transformed)
      CHECK(s.chordal_distance(*rep.witness) < 0.25);
  }

  CHECK_THROWS_AS(leader_experiment<double>(4, 0.05, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(leader_experiment<double>(30, 0.0, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(leader_families<double>(7), std::invalid_argument);
}

TEST_CASE("free-group experiment certifies the low-mass side and its push bound") {
  const auto result = f2_experiment<double>(4, 1.0 / 12.0, 49, 2000, 11);

  CHECK(result.a1.verdict == Verdict::CertificateEmpty);
  CHECK(result.a1.transforms == std::vector<std::string>{"e", "b"});
  CHECK_FALSE(result.a1.certificate.empty());
  CHECK(result.a1_samples == 2000);
  CHECK(result.a1_violations == 0);
  CHECK(result.a1_min_push_mass >= 2.0 * std::sqrt(2.0) / 3.0 - 1e-9);
  CHECK(result.a1_min_distance >= 1.0 / 3.0 - 1e-9);

  // sixteen disjoint shifts: 1/4 < 1/3 - 2/12 fails, so pick eps = 1/25 where
  // 1/4 < 1/3 - 2/25 certifies emptiness without sampling.
  const auto pigeon = f2_experiment<double>(4, 1.0 / 25.0, 16, 2000, 11);
  CHECK(pigeon.a2.verdict == Verdict::CertificateEmpty);
  CHECK(pigeon.a2.samples == 0);
  CHECK_FALSE(pigeon.a2.certificate.empty());
  REQUIRE(pigeon.a2.transforms.size() == 16);
  CHECK(pigeon.a2.transforms[0] == "A");
  CHECK(pigeon.a2.transforms[2] == "AAA");
}

TEST_CASE("free-group experiment falls back to sampling when the pigeonhole is loose") {
  // 1/sqrt(4) = 1/2 >= 1/3 - 2/12 = 1/6, so the high-mass side must search.
  const auto result = f2_experiment<double>(5, 1.0 / 12.0, 4, 2000, 3);
  CHECK(result.a2.verdict != Verdict::CertificateEmpty);
  CHECK(result.a2.samples > 0);
  CHECK(std::isfinite(result.a2.margin));
  if (result.a2.verdict == Verdict::WitnessFound) {
    const BallIndex universe(5);
    const Eigen::Index n = static_cast<Eigen::Index>(universe.size());
    for (long i = 1; i <= 4; ++i) {
      const auto mask = prefix_class_indices(universe, -i);
      const auto s = mask_threshold_set<double>("m", n, mask, 1.0 / 3.0, MaskSide::AtLeast);
      CHECK(s.chordal_distance(*result.a2.witness) < 1.0 / 12.0);
    }
  }

  // The empirical branch needs every shifted mask to be nonempty.
  CHECK_THROWS_AS(f2_experiment<double>(3, 1.0 / 12.0, 4, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(f2_experiment<double>(2, 0.1, 1, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(f2_experiment<double>(3, 0.0, 1, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(f2_experiment<double>(3, 0.1, 0, 100, 0), std::invalid_argument);
}

TEST_CASE("lifting to a direct sum keeps sets and covers honest") {
  const auto base = cap_set<double>("cap", axis(3, 0), kPi / 3.0);

  // A trivial second factor lifts to the set itself.
  const auto same = lift_set<double>(base, 1, 3, 0);
  CHECK(same.label == "cap");
  CHECK(same.dimension == 3);

  const auto lifted = lift_set<double>(base, 2, 4, 3);
  CHECK(lifted.label == "lift2(cap)");
  CHECK(lifted.dimension == 7);
  // Membership needs factor mass at least sqrt2/2 and a normalized part in
  // the base set.
  Vector<double> x = Vector<double>::Zero(7);
  x.segment(4, 3) = 0.9 * axis(3, 0);
  x[0] = std::sqrt(1.0 - 0.81);
  CHECK(lifted.member(x));
  x.segment(4, 3) = 0.5 * axis(3, 0);  // mass below the floor
  x[0] = std::sqrt(0.75);
  CHECK_FALSE(lifted.member(x));

  CHECK_THROWS_AS(lift_set<double>(base, 3, 3, 3), std::invalid_argument);
  CHECK_THROWS_AS(lift_set<double>(base, 1, 4, 3), std::invalid_argument);

  // One factor's whole sphere alone leaves the low-mass half uncovered...
  Cover<double> everything1;
  everything1.sets.push_back(whole_sphere<double>(3));
  const auto one_sided = lift_cover<double>(everything1, 3, 3);
  CHECK(one_sided.sets.size() == 1);
  const std::size_t missed = one_sided.empirical_uncovered(2000, 41);
  CHECK(missed > 800);

  // ...but jointly with the other factor the lift always covers.
  Cover<double> everything2;
  everything2.sets.push_back(whole_sphere<double>(3));
  const auto joint = lift_cover<double>(everything1, everything2, 3, 3);
  CHECK(joint.sets.size() == 2);
  CHECK(joint.empirical_uncovered(2000, 42) == 0);
}

TEST_CASE("lifted hemisphere covers leave no point of the product sphere behind") {
  Cover<double> halves;
  halves.sets.push_back(cap_set<double>("north", axis(2, 0), kPi / 2.0));
  halves.sets.push_back(cap_set<double>("south", axis(2, 0, -1.0), kPi / 2.0));
  const auto lifted = lift_cover<double>(halves, halves, 2, 2);
  REQUIRE(lifted.sets.size() == 4);
  CHECK(lifted.sets[0].label == "lift1(north)");
  CHECK(lifted.sets[3].label == "lift2(south)");
  CHECK(lifted.empirical_uncovered(100000, 17) == 0);
}

TEST_CASE("margins survive the lift within the stability radius") {
  CHECK(lift_margin_bound(0.3) == Catch::Approx(0.1));
  CHECK(lift_margin_bound(3.0) == Catch::Approx(kPi / 8.0));

  const auto base = cap_set<double>("cap", axis(4, 0), kPi / 3.0);
  const auto stability = lift_margin_check<double>(base, 1, 4, 3, 0.3, 2000, 23);
  CHECK(stability.delta == Catch::Approx(0.1));
  CHECK(stability.checked > 0);
  CHECK(stability.checked <= 2000);
  CHECK(stability.violations == 0);

  CHECK_THROWS_AS(lift_margin_check<double>(base, 1, 4, 3, 0.0, 100, 0), std::invalid_argument);
  SphericalSet<double> opaque;
  opaque.label = "opaque";
  opaque.dimension = 4;
  opaque.member = base.member;
  CHECK_THROWS_AS(lift_margin_check<double>(opaque, 1, 4, 3, 0.3, 100, 0), std::invalid_argument);
}

TEST_CASE("cover scans label essential elements by exhibited witnesses only") {
  const Eigen::Index d = 9;
  Cover<double> gamma;
  gamma.sets.push_back(cap_set<double>("north", axis(d, 0), kPi / 2.0));
  gamma.sets.push_back(cap_set<double>("south", axis(d, 0, -1.0), kPi / 2.0));
  const std::vector<UnitaryAction<double>> transforms{
      UnitaryAction<double>::scalar("id", 1.0, d), UnitaryAction<double>::scalar("flip", -1.0, d)};

  const auto entries = essential_element_scan<double>(gamma, transforms, 0.1, d, 3000, 19);
  REQUIRE(entries.size() == 2);
  for (const auto& e : entries) {
    CHECK(e.essential);
    CHECK(e.report.verdict == Verdict::WitnessFound);
  }
  CHECK(entries[0].label == "north");
  CHECK(entries[1].label == "south");
  // Distinct elements get distinct search streams.
  CHECK(entries[0].report.seed != entries[1].report.seed);

  // The three-block families admit no witness at small radius, and absence
  // of a witness never upgrades to essential.
  const auto leader = essential_element_scan<double>(leader_families<double>(30), 0.05, 30, 500, 2);
  REQUIRE(leader.size() == 2);
  for (const auto& e : leader) {
    CHECK_FALSE(e.essential);
    CHECK(e.report.verdict == Verdict::Inconclusive);
  }

  // A whole-sphere element yields an immediate zero-margin witness.
  Cover<double> trivial;
  trivial.sets.push_back(whole_sphere<double>(d));
  const auto everything =
      essential_element_scan<double>(trivial, {transforms[0]}, 0.1, d, 100, 0);
  REQUIRE(everything.size() == 1);
  CHECK(everything[0].essential);
  CHECK(everything[0].report.margin == 0.0);

  CHECK_THROWS_AS(essential_element_scan<double>(Cover<double>{}, transforms, 0.1, d, 100, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      essential_element_scan<double>(std::vector<SymbolicFamily<double>>{}, 0.1, d, 100, 0),
      std::invalid_argument);
}

TEST_CASE("essentiality reports serialize with verdict-dependent keys") {
  const Eigen::Index d = 9;
  const auto a = cap_set<double>("cap", axis(d, 0), kPi / 2.0);
  const std::vector<UnitaryAction<double>> id{UnitaryAction<double>::scalar("id", 1.0, d)};

  const auto found = witness_search<double>(a, id, 0.1, d, 1000, 1);
  REQUIRE(found.verdict == Verdict::WitnessFound);
  auto fj = nlohmann::json::parse(found.to_json());
  CHECK(fj["verdict"] == "witness-found");
  CHECK(fj.contains("witness"));
  CHECK(fj["witness"].size() == static_cast<std::size_t>(d));
  CHECK_FALSE(fj.contains("certificate"));
  CHECK(fj["margin"].get<double>() < 0.1);

  const auto certified = leader_experiment<double>(30, 0.05, 200, 3)[0];
  auto cj = nlohmann::json::parse(certified.to_json());
  CHECK(cj["verdict"] == "certificate-empty");
  CHECK(cj.contains("certificate"));
  CHECK_FALSE(cj.contains("witness"));

  // An inconclusive search keeps its best margin but gains neither key.  The
  // quarter caps around the two poles stay a chordal sqrt(2) apart, so no
  // point is within 0.2 of both and the verdict cannot be witness-found.
  const auto narrow = cap_set<double>("cap", axis(d, 0), kPi / 4.0);
  const auto thin = witness_search<double>(
      narrow,
      {UnitaryAction<double>::scalar("id", 1.0, d), UnitaryAction<double>::scalar("flip", -1.0, d)},
      0.2, d, 64, 5);
  REQUIRE(thin.verdict == Verdict::Inconclusive);
  auto tj = nlohmann::json::parse(thin.to_json());
  CHECK(tj["verdict"] == "inconclusive");
  CHECK_FALSE(tj.contains("witness"));
  CHECK_FALSE(tj.contains("certificate"));
  CHECK(tj["margin"].get<double>() >= 0.2);
  CHECK(tj["samples"].get<std::size_t>() <= 64);
}
