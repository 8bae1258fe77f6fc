#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "avt/kernels.hpp"

using namespace avt::kernels;

namespace {

struct Case {
  std::vector<double> xs, ys, sx, sy, w;
};

Case random_case(std::mt19937_64& rng, std::size_t atoms, std::size_t sites) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Case c;
  for (std::size_t i = 0; i < atoms; ++i) {
    c.xs.push_back(u(rng));
    c.ys.push_back(u(rng));
  }
  for (std::size_t j = 0; j < sites; ++j) {
    c.sx.push_back(u(rng));
    c.sy.push_back(u(rng));
    c.w.push_back(0.3 * u(rng));
  }
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

constexpr Metric kMetrics[] = {Metric::kEuclidean, Metric::kSquaredEuclidean, Metric::kConcaveSqrt};

}  // namespace

TEST_CASE("scalar nearest_two matches a direct scan") {
  std::mt19937_64 rng(11);
  const Case c = random_case(rng, 37, 6);
  std::vector<std::int32_t> best(37);
  std::vector<double> bs(37), ru(37);
  for (Metric m : kMetrics) {
    nearest_two(Isa::kScalar, m, c.xs, c.ys, {c.sx, c.sy, c.w}, {best, bs, ru});
    for (std::size_t a = 0; a < 37; ++a) {
      std::vector<double> s;
      for (std::size_t j = 0; j < 6; ++j) s.push_back(score(m, c.xs[a], c.ys[a], c.sx[j], c.sy[j], c.w[j]));
      const auto it = std::min_element(s.begin(), s.end());
      CHECK(best[a] == it - s.begin());
      CHECK(bs[a] == *it);
      std::sort(s.begin(), s.end());
      CHECK(ru[a] == s[1]);
    }
  }
}

TEST_CASE("single site has an infinite runner-up") {
  const std::vector<double> xs{0.1, 0.2, 0.3, 0.4, 0.5}, ys{0, 0, 0, 0, 0};
  const std::vector<double> sx{0.0}, sy{0.0}, w{0.0};
  std::vector<std::int32_t> best(5);
  std::vector<double> bs(5), ru(5);
  for (Isa isa : {Isa::kScalar, best_available_isa()}) {
    nearest_two(isa, Metric::kEuclidean, xs, ys, {sx, sy, w}, {best, bs, ru});
    for (std::size_t a = 0; a < 5; ++a) {
      CHECK(best[a] == 0);
      CHECK(ru[a] == std::numeric_limits<double>::infinity());
    }
  }
}

TEST_CASE("exact score ties resolve to the lowest index in every variant") {
  // Atoms on the perpendicular bisector of two mirrored sites.
  std::vector<double> xs, ys;
  for (int i = 0; i < 11; ++i) {
    xs.push_back(0.5);
    ys.push_back(0.1 * i);
  }
  const std::vector<double> sx{0.25, 0.75}, sy{0.5, 0.5}, w{0.0, 0.0};
  std::vector<std::int32_t> best(11);
  std::vector<double> bs(11), ru(11);
  for (Isa isa : {Isa::kScalar, best_available_isa()}) {
    nearest_two(isa, Metric::kSquaredEuclidean, xs, ys, {sx, sy, w}, {best, bs, ru});
    for (std::size_t a = 0; a < 11; ++a) {
      CHECK(best[a] == 0);
      CHECK(bs[a] == ru[a]);
    }
  }
}

TEST_CASE("SIMD variants reproduce the scalar kernels bit for bit") {
  if (!isa_available(Isa::kAvx2)) {
    MESSAGE("AVX2 not available on this CPU; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(2024);
  for (std::size_t atoms : {1u, 3u, 4u, 5u, 8u, 63u, 1000u}) {
    for (std::size_t sites : {1u, 2u, 3u, 7u, 16u}) {
      const Case c = random_case(rng, atoms, sites);
      std::vector<std::uint8_t> group(sites, 0);
      group[0] = 1;
      if (sites > 3) group[2] = 1;
      for (Metric m : kMetrics) {
        std::vector<std::int32_t> b0(atoms), b1(atoms), r0(atoms), r1(atoms);
        std::vector<double> s0(atoms), s1(atoms), u0(atoms), u1(atoms);
        nearest_two(Isa::kScalar, m, c.xs, c.ys, {c.sx, c.sy, c.w}, {b0, s0, u0});
        nearest_two(Isa::kAvx2, m, c.xs, c.ys, {c.sx, c.sy, c.w}, {b1, s1, u1});
        std::vector<double> g0(atoms), g1(atoms), m0(atoms), m1(atoms);
        group_min(Isa::kScalar, m, c.xs, c.ys, {c.sx, c.sy, c.w}, group, {g0, m0, r0});
        group_min(Isa::kAvx2, m, c.xs, c.ys, {c.sx, c.sy, c.w}, group, {g1, m1, r1});
        std::size_t mismatches = 0;
        for (std::size_t a = 0; a < atoms; ++a) {
          if (b0[a] != b1[a] || !same_bits(s0[a], s1[a]) || !same_bits(u0[a], u1[a])) ++mismatches;
          if (!same_bits(g0[a], g1[a]) || !same_bits(m0[a], m1[a]) || r0[a] != r1[a]) ++mismatches;
        }
        CAPTURE(atoms);
        CAPTURE(sites);
        CHECK(mismatches == 0);
      }
    }
  }
}

TEST_CASE("group_min splits the sites by flag") {
  std::mt19937_64 rng(5);
  const Case c = random_case(rng, 20, 5);
  const std::vector<std::uint8_t> group{0, 1, 0, 1, 0};
  std::vector<double> g(20), r(20);
  std::vector<std::int32_t> arg(20);
  group_min(Isa::kScalar, Metric::kEuclidean, c.xs, c.ys, {c.sx, c.sy, c.w}, group, {g, r, arg});
  for (std::size_t a = 0; a < 20; ++a) {
    double eg = std::numeric_limits<double>::infinity(), er = eg;
    std::int32_t ea = -1;
    for (std::size_t j = 0; j < 5; ++j) {
      const double s = score(Metric::kEuclidean, c.xs[a], c.ys[a], c.sx[j], c.sy[j], c.w[j]);
      if (group[j]) {
        eg = std::min(eg, s);
      } else if (s < er) {
        er = s;
        ea = static_cast<std::int32_t>(j);
      }
    }
    CHECK(g[a] == eg);
    CHECK(r[a] == er);
    CHECK(arg[a] == ea);
  }
  const std::vector<std::uint8_t> all(5, 1);
  group_min(Isa::kScalar, Metric::kEuclidean, c.xs, c.ys, {c.sx, c.sy, c.w}, all, {g, r, arg});
  CHECK(arg[0] == -1);
  CHECK(r[0] == std::numeric_limits<double>::infinity());
}

TEST_CASE("dispatch") {
  CHECK(isa_available(Isa::kScalar));
  const Isa before = active_isa();
  set_active_isa(Isa::kScalar);
  CHECK(active_isa() == Isa::kScalar);
  set_active_isa(before);
  CHECK(to_string(Isa::kScalar) == "scalar");
  std::vector<double> xs{0.0}, ys{0.0, 1.0};
  std::vector<std::int32_t> best(1);
  std::vector<double> bs(1), ru(1);
  const std::vector<double> sx{0.0}, sy{0.0}, w{0.0};
  CHECK_THROWS(nearest_two(Isa::kScalar, Metric::kEuclidean, xs, ys, {sx, sy, w}, {best, bs, ru}));
}
