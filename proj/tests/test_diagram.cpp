#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "avt/diagram.hpp"
#include "avt/error.hpp"
#include "avt/kernels.hpp"
#include "support/oracles.hpp"

using namespace avt;

namespace {

std::vector<Site> make_sites(const std::vector<std::array<double, 3>>& rows) {
  std::vector<Site> out;
  for (const auto& r : rows) out.push_back({{r[0], r[1]}, r[2], out.size()});
  return out;
}

AtomicMeasure unit_grid(std::size_t k) { return from_grid(uniform_grid(k, k), 1.0 / static_cast<double>(k)); }

// Four atoms on the line y = 0.5 at x in {0.25, 0.75}: the 2x2 example with
// every atom level with both sites, so distance gaps are exactly 0.5.
AtomicMeasure line_atoms() {
  return AtomicMeasure(2, {0.25, 0.5, 0.75, 0.5, 0.25, 0.5, 0.75, 0.5}, {0.25, 0.25, 0.25, 0.25});
}

const DistanceFamily kEuclid = DistanceFamily::euclidean();

}  // namespace

TEST_CASE("site validation") {
  CHECK_THROWS_AS(validate_sites({}, 2), Error);
  CHECK_THROWS_AS(validate_sites(make_sites({{0, 0, 0.0}}), 2), Error);
  CHECK_THROWS_AS(validate_sites(make_sites({{0, 0, 1}, {0, 0, 1}}), 2), Error);
  auto wrong_index = make_sites({{0, 0, 1}, {1, 0, 1}});
  wrong_index[1].index = 5;
  CHECK_THROWS_AS(validate_sites(wrong_index, 2), Error);
  try {
    validate_sites(make_sites({{0, 0, 1}}), 3);
    FAIL("expected dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  CHECK_THROWS_AS(WeightVector({0.0, std::nan("")}), Error);
}

TEST_CASE("single site takes everything") {
  const auto sites = make_sites({{0.3, 0.7, 1.0}});
  const AtomicMeasure m = unit_grid(8);
  const Assignment a = assign(sites, WeightVector({-4.0}), kEuclid, m);
  CHECK(a.region_mass()[0] == doctest::Approx(m.total_mass()).epsilon(1e-15));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK_FALSE(a.is_split(i));
}

TEST_CASE("mirror sites split a 2x2 grid evenly") {
  const auto sites = make_sites({{0.25, 0.5, 0.5}, {0.75, 0.5, 0.5}});
  const AtomicMeasure m = unit_grid(2);
  const Assignment a = assign(sites, WeightVector::zeros(2), kEuclid, m);
  CHECK(a.region_mass()[0] == 0.5);
  CHECK(a.region_mass()[1] == 0.5);
}

TEST_CASE("weight offset equal to the distance gap ties the far column") {
  const auto sites = make_sites({{0.25, 0.5, 0.5}, {0.75, 0.5, 0.5}});
  const AtomicMeasure m = line_atoms();
  const Assignment a = assign(sites, WeightVector({0.5, 0.0}), kEuclid, m);
  CHECK(a.region_mass()[0] == 0.75);
  CHECK(a.region_mass()[1] == 0.25);
  std::size_t split = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!a.is_split(i)) {
      CHECK(a.shares(i)[0].site == 0);
      CHECK(m.position(i)[0] == 0.25);
      continue;
    }
    ++split;
    CHECK(m.position(i)[0] == 0.75);
    CHECK(a.shares(i).size() == 2);
    CHECK(a.shares(i)[0].fraction == 0.5);
  }
  CHECK(split == 2);
  CHECK(split_mass(a, m) == 0.5);
}

TEST_CASE("assign agrees with a brute-force argmin") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const AtomicMeasure m = unit_grid(23);
  for (const auto& fam : {DistanceFamily::euclidean(), DistanceFamily::squared_euclidean(),
                          DistanceFamily::pnorm(1.5), DistanceFamily::concave_sqrt()}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Site> sites;
      std::vector<double> w;
      for (std::size_t j = 0; j < 6; ++j) {
        sites.push_back({{u(rng), u(rng)}, 1.0 / 6.0, j});
        w.push_back(0.2 * u(rng));
      }
      const Assignment a = assign(sites, WeightVector(w), fam, m);
      const auto owners = testing::brute_force_owners(
          m.size(), sites.size(), [&](std::size_t at, std::size_t j) { return fam(sites[j].position, m.position(at)); },
          w, kDefaultTieTol);
      std::size_t disagreements = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto shares = a.shares(i);
        if (shares.size() != owners[i].size()) {
          ++disagreements;
          continue;
        }
        for (std::size_t k = 0; k < shares.size(); ++k) {
          if (shares[k].site != owners[i][k]) ++disagreements;
        }
      }
      CAPTURE(fam.name());
      CHECK(disagreements == 0);
      double total = 0.0;
      for (double r : a.region_mass()) total += r;
      CHECK(total == doctest::Approx(m.total_mass()).epsilon(1e-12));
    }
  }
}

TEST_CASE("scalar and SIMD assignment paths agree exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const AtomicMeasure m = unit_grid(64);
  std::vector<Site> sites;
  std::vector<double> w;
  for (std::size_t j = 0; j < 9; ++j) {
    sites.push_back({{u(rng), u(rng)}, 1.0 / 9.0, j});
    w.push_back(0.1 * u(rng));
  }
  const kernels::Isa before = kernels::active_isa();
  kernels::set_active_isa(kernels::Isa::kScalar);
  const Assignment scalar = assign(sites, WeightVector(w), kEuclid, m);
  kernels::set_active_isa(kernels::best_available_isa());
  const Assignment fast = assign(sites, WeightVector(w), kEuclid, m);
  kernels::set_active_isa(before);
  for (std::size_t j = 0; j < sites.size(); ++j) CHECK(scalar.region_mass()[j] == fast.region_mass()[j]);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(scalar.dominant_site(i) == fast.dominant_site(i));
}

TEST_CASE("raising one weight never shrinks its region") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const AtomicMeasure m = unit_grid(32);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Site> sites;
    std::vector<double> w;
    for (std::size_t j = 0; j < 5; ++j) {
      sites.push_back({{u(rng), u(rng)}, 0.2, j});
      w.push_back(0.1 * u(rng));
    }
    const std::size_t i = trial % 5;
    const Assignment before = assign(sites, WeightVector(w), kEuclid, m);
    w[i] += 0.05 * u(rng);
    const Assignment after = assign(sites, WeightVector(w), kEuclid, m);
    CHECK(after.region_mass()[i] >= before.region_mass()[i]);
  }
}

TEST_CASE("excess examples") {
  const auto sites = make_sites({{0.25, 0.5, 0.5}, {0.75, 0.5, 0.5}});
  const AtomicMeasure m = line_atoms();
  const Assignment a = assign(sites, WeightVector({0.5, 0.0}), kEuclid, m);
  const Excess e = excess(a, sites);
  CHECK(e.phi[0] == 0.25);
  CHECK(e.phi[1] == -0.25);
  CHECK(e.tau == 0.25);
  REQUIRE(e.tau_prime);
  CHECK(*e.tau_prime == -0.25);
  CHECK(e.max_set == std::vector<std::size_t>{0});
  CHECK(objective(a, sites) == 0.125);

  const Assignment even = assign(sites, WeightVector::zeros(2), kEuclid, m);
  const Excess solved = excess(even, sites);
  CHECK(solved.tau == 0.0);
  CHECK_FALSE(solved.tau_prime);
  CHECK(solved.max_set.size() == 2);
  CHECK(objective(even, sites) == 0.0);

  auto bad = sites;
  bad[0].demand = 0.9;
  try {
    excess(a, bad);
    FAIL("expected demand mismatch");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kDemandMismatch);
  }
}

TEST_CASE("excess with a tied maximum") {
  // Three atoms of mass 0.4, 0.4, 0.2, each at its own site.
  const AtomicMeasure m(2, {0, 0, 10, 0, 0, 10}, {0.4, 0.4, 0.2});
  const double third = 1.0 / 3.0;
  const auto sites = make_sites({{0, 0, third}, {10, 0, third}, {0, 10, third}});
  const Assignment a = assign(sites, WeightVector::zeros(3), kEuclid, m);
  const Excess e = excess(a, sites);
  CHECK(e.tau == doctest::Approx(0.4 - third).epsilon(1e-15));
  CHECK(e.max_set == std::vector<std::size_t>{0, 1});
  REQUIRE(e.tau_prime);
  CHECK(*e.tau_prime == doctest::Approx(0.2 - third).epsilon(1e-15));
  const double expected = 2.0 * (0.4 - third) * (0.4 - third) + (0.2 - third) * (0.2 - third);
  CHECK(objective(a, sites) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(objective(a, sites) == doctest::Approx(0.02667).epsilon(1e-3));
  double sum = 0.0;
  for (double p : e.phi) sum += p;
  CHECK(std::abs(sum) <= 1e-9);
}

TEST_CASE("transport cost examples") {
  const AtomicMeasure one(2, {0.2, 0.7}, {1.0});
  const auto at_atom = make_sites({{0.2, 0.7, 1.0}});
  CHECK(transport_cost(assign(at_atom, WeightVector::zeros(1), kEuclid, one), at_atom, kEuclid, one) == 0.0);

  const AtomicMeasure two(2, {0, 0, 1, 0}, {0.5, 0.5});
  const auto matched = make_sites({{0, 0, 0.5}, {1, 0, 0.5}});
  CHECK(transport_cost(assign(matched, WeightVector::zeros(2), kEuclid, two), matched, kEuclid, two) == 0.0);

  const auto origin = make_sites({{0, 0, 1.0}});
  double previous_error = 1.0;
  for (std::size_t k : {8u, 32u, 128u}) {
    const AtomicMeasure m = unit_grid(k);
    const double c = transport_cost(assign(origin, WeightVector::zeros(1), kEuclid, m), origin, kEuclid, m);
    const double err = std::abs(c - testing::mean_distance_unit_square());
    CHECK(err <= 2.0 / static_cast<double>(k));
    CHECK(err < previous_error);
    previous_error = err;
  }
}

TEST_CASE("any split of tied atoms gives the same cost") {
  // Atoms on the bisector are equidistant from both sites, so moving their
  // shares between the tied sites cannot change the cost.
  const auto sites = make_sites({{0.25, 0.25, 0.5}, {0.75, 0.75, 0.5}});
  const AtomicMeasure m = unit_grid(16);
  const Assignment equal = assign(sites, WeightVector::zeros(2), kEuclid, m);
  std::vector<std::uint32_t> offsets{0};
  std::vector<Share> shares;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (equal.is_split(i)) {
      shares.push_back({0, 0.9});
      shares.push_back({1, 0.1});
    } else {
      shares.push_back(equal.shares(i)[0]);
    }
    offsets.push_back(static_cast<std::uint32_t>(shares.size()));
  }
  const Assignment skewed(offsets, shares, 2, m.masses());
  CHECK(split_mass(equal, m) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK(transport_cost(skewed, sites, kEuclid, m) ==
        doctest::Approx(transport_cost(equal, sites, kEuclid, m)).epsilon(1e-14));
}

TEST_CASE("score summary and tied sites") {
  const auto sites = make_sites({{0.25, 0.5, 0.5}, {0.75, 0.5, 0.5}, {0.5, 0.9, 0.0001}});
  const AtomicMeasure m(2, {0.5, 0.5, 0.1, 0.5}, {1.0, 1.0});
  const ScoreSummary s = score_summary(sites, WeightVector::zeros(3), kEuclid, m);
  CHECK(s.best[0] == 0);
  CHECK(s.runner_up[0] == s.best_score[0]);
  CHECK(tied_sites(sites, WeightVector::zeros(3), kEuclid, m, 0, 1e-9) == std::vector<std::uint32_t>{0, 1});
  CHECK(tied_sites(sites, WeightVector::zeros(3), kEuclid, m, 1, 1e-9) == std::vector<std::uint32_t>{0});
}
