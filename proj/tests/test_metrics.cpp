#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "avt/error.hpp"
#include "avt/measure.hpp"
#include "avt/metrics.hpp"

using namespace avt;

namespace {

using Point = std::vector<double>;

const std::vector<DistanceFamily>& presets() {
  static const std::vector<DistanceFamily> all{DistanceFamily::euclidean(), DistanceFamily::squared_euclidean(),
                                               DistanceFamily::pnorm(3.0), DistanceFamily::concave_sqrt()};
  return all;
}

}  // namespace

TEST_CASE("distance examples") {
  const Point o{0, 0}, z{3, 4};
  CHECK(distance(DistanceFamily::euclidean(), o, z) == 5.0);
  CHECK(distance(DistanceFamily::squared_euclidean(), o, z) == 25.0);
  CHECK(distance(DistanceFamily::euclidean(), z, z) == 0.0);
  CHECK(distance(DistanceFamily::concave_sqrt(), o, z) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(distance(DistanceFamily::pnorm(3.0), o, z) == doctest::Approx(std::cbrt(91.0)).epsilon(1e-14));
  CHECK(distance(DistanceFamily::pnorm(2.0), o, z) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(distance(DistanceFamily::euclidean(), Point{0, 0, 0}, z), Error);
}

TEST_CASE("callback families") {
  const auto aniso = DistanceFamily::convex_translate(
      [](std::span<const double> v) { return std::sqrt(4.0 * v[0] * v[0] + v[1] * v[1]); }, "aniso");
  CHECK(aniso.kind() == FamilyKind::kConvexTranslate);
  CHECK(distance(aniso, Point{1, 1}, Point{2, 1}) == 2.0);
  CHECK_FALSE(aniso.kernel_metric().has_value());

  const auto logd = DistanceFamily::concave_of_norm([](double r) { return std::log1p(r); }, "log1p");
  CHECK(logd.kind() == FamilyKind::kConcaveOfNorm);
  CHECK(distance(logd, Point{0, 0}, Point{3, 4}) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
}

TEST_CASE("selector parsing") {
  CHECK(DistanceFamily::parse("euclidean").kind() == FamilyKind::kEuclidean);
  CHECK(DistanceFamily::parse("sqeuclidean").kind() == FamilyKind::kSquaredEuclidean);
  CHECK(DistanceFamily::parse("pnorm:1.5").kind() == FamilyKind::kConvexTranslate);
  CHECK(DistanceFamily::parse("concave-sqrt").kind() == FamilyKind::kConcaveOfNorm);
  for (const char* bad : {"", "manhattan", "pnorm:1", "pnorm:0.5", "pnorm:x", "pnorm:inf", "pnorm:"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(DistanceFamily::parse(bad), Error);
  }
  CHECK_THROWS_AS(DistanceFamily::pnorm(1.0), Error);
}

TEST_CASE("diff examples") {
  const Point p{0, 0}, q{2, 0};
  const auto e = DistanceFamily::euclidean();
  CHECK(diff(e, p, q, Point{1, 0}) == 0.0);
  CHECK(diff(e, p, q, Point{0, 0}) == -2.0);
  CHECK(diff(DistanceFamily::squared_euclidean(), p, q, Point{0.5, 0}) == -2.0);
  try {
    diff(e, p, p, Point{1, 1});
    FAIL("expected degenerate pair");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kDegeneratePair);
  }
}

TEST_CASE("diff properties on random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Point p{u(rng), u(rng)}, q{u(rng), u(rng)}, z{u(rng), u(rng)};
    for (const auto& fam : presets()) {
      CHECK(diff(fam, p, q, z) == -diff(fam, q, p, z));
      CHECK(fam(p, z) >= 0.0);
      // Continuity probe: a tiny displacement moves the value a tiny amount.
      const Point z2{z[0] + 1e-9, z[1] - 1e-9};
      CHECK(std::abs(fam(p, z) - fam(p, z2)) < 1e-4);
    }
    const double pq = std::hypot(p[0] - q[0], p[1] - q[1]);
    CHECK(std::abs(diff(DistanceFamily::euclidean(), p, q, z)) <= pq * (1.0 + 1e-12));

    // Squared Euclidean bisectors are hyperplanes: diff is affine on lines.
    const Point dir{u(rng), u(rng)};
    const auto sq = DistanceFamily::squared_euclidean();
    auto at = [&](double t) { return diff(sq, p, q, Point{z[0] + t * dir[0], z[1] + t * dir[1]}); };
    CHECK(std::abs(at(-1.0) - 2.0 * at(0.0) + at(1.0)) <= 1e-11);
  }
}

TEST_CASE("gamma range examples") {
  const Point p{0, 0}, q{2, 0};
  const auto e = DistanceFamily::euclidean();

  // Atoms along the whole axis reach the degenerate bisector rays at -2 and +2.
  std::vector<double> pos, mass;
  for (int i = -20; i <= 22; ++i) {
    for (int j = -20; j <= 20; ++j) {
      pos.push_back(i);
      pos.push_back(j);
      mass.push_back(1.0);
    }
  }
  const GammaRange wide = gamma_range(e, p, q, AtomicMeasure(2, pos, mass));
  CHECK(wide.lower < -2.0);
  CHECK(wide.lower == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(wide.upper > 2.0);
  CHECK(wide.upper == doctest::Approx(2.0).epsilon(1e-14));

  const GammaRange mid = gamma_range(e, p, q, AtomicMeasure(2, {1.0, 0.0}, {1.0}));
  CHECK(mid.lower < 0.0);
  CHECK(mid.upper > 0.0);
  CHECK(mid.upper < 1e-12);
  CHECK(mid.lower > -1e-12);

  const AtomicMeasure grid = from_grid(uniform_grid(2, 2), 0.5);
  const GammaRange sq = gamma_range(DistanceFamily::squared_euclidean(), p, q, grid);
  CHECK(sq.lower < -3.0);
  CHECK(sq.lower == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(sq.upper > -1.0);
  CHECK(sq.upper == doctest::Approx(-1.0).epsilon(1e-14));

  // Antisymmetry holds exactly.
  for (const auto& fam : presets()) {
    const GammaRange a = gamma_range(fam, p, q, grid);
    const GammaRange b = gamma_range(fam, q, p, grid);
    CHECK(b.lower == -a.upper);
    CHECK(b.upper == -a.lower);
    CHECK(a.lower < a.upper);
  }
  CHECK_THROWS_AS(gamma_range(e, p, p, grid), Error);
}

TEST_CASE("max gamma bound over pairs") {
  const AtomicMeasure grid = from_grid(uniform_grid(4, 4), 0.25);
  const auto e = DistanceFamily::euclidean();
  const std::vector<double> sites{0.1, 0.2, 0.9, 0.5, 0.4, 0.8};
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      const Point p{sites[2 * i], sites[2 * i + 1]}, q{sites[2 * j], sites[2 * j + 1]};
      expected = std::max(expected, gamma_range(e, p, q, grid).upper);
    }
  }
  CHECK(max_gamma_bound(e, sites, grid) == expected);
  CHECK(max_gamma_bound(e, std::vector<double>{0.5, 0.5}, grid) == 0.0);
}

TEST_CASE("admissibility probe") {
  const AtomicMeasure one(2, {0.3, 0.3}, {2.0});
  const AdmissibilityReport single =
      probe_admissibility(DistanceFamily::euclidean(), Point{0, 0}, Point{1, 0}, one, 2);
  CHECK(single.monotone);
  CHECK(single.max_jump == 2.0);
  CHECK(single.region_mass.front() == 0.0);
  CHECK(single.region_mass.back() == 2.0);

  const AtomicMeasure grid = from_grid(uniform_grid(64, 64), 1.0 / 64.0);
  for (const auto& fam : presets()) {
    const AdmissibilityReport r = probe_admissibility(fam, Point{0.25, 0.5}, Point{0.75, 0.5}, grid, 100);
    CAPTURE(fam.name());
    CHECK(r.monotone);
    CHECK(r.region_mass.front() == 0.0);
    CHECK(r.region_mass.back() == doctest::Approx(grid.total_mass()).epsilon(1e-12));
    CHECK(r.gammas.size() == 100);
  }
  // For the Euclidean pair the sublevel sets are bounded by hyperbola
  // branches; the observed largest step on this grid is a regression value.
  const AdmissibilityReport e =
      probe_admissibility(DistanceFamily::euclidean(), Point{0.25, 0.5}, Point{0.75, 0.5}, grid, 100);
  MESSAGE("euclidean 64x64 max_jump = " << e.max_jump);
  CHECK(e.max_jump <= 4.0 * grid.total_mass() / 100.0);
  CHECK_THROWS_AS(probe_admissibility(DistanceFamily::euclidean(), Point{0, 0}, Point{1, 0}, grid, 1), Error);
}
