#pragma once

// Planar argmin kernels behind the weighted Voronoi assignment. Every kernel
// has a scalar reference implementation; SIMD variants are selected at
// runtime and must reproduce the scalar results bit for bit.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace avt::kernels {

// Distance presets that have a vectorized form: d = f(|z - p|^2).
enum class Metric : std::uint8_t { kEuclidean, kSquaredEuclidean, kConcaveSqrt };

enum class Isa : std::uint8_t { kScalar, kAvx2 };

std::string_view to_string(Isa isa) noexcept;

// Site coordinates and weights, structure-of-arrays.
struct SiteTable {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> weight;

  std::size_t size() const noexcept { return x.size(); }
};

// Lowest score, its site (lowest index on exact ties) and the runner-up
// score, for each atom. score_j = d_j(z) - w_j.
struct NearestTwo {
  std::span<std::int32_t> best;
  std::span<double> best_score;
  std::span<double> runner_up;
};

// Minimum score over sites flagged in `in_group`, and minimum / argmin over
// the remaining sites, for each atom.
struct GroupMin {
  std::span<double> group_min;
  std::span<double> rest_min;
  std::span<std::int32_t> rest_arg;
};

inline double metric_of_r2(Metric metric, double r2) noexcept {
  switch (metric) {
    case Metric::kEuclidean: return std::sqrt(r2);
    case Metric::kSquaredEuclidean: return r2;
    case Metric::kConcaveSqrt: return std::sqrt(std::sqrt(r2));
  }
  return r2;
}

inline double score(Metric metric, double x, double y, double px, double py, double w) noexcept {
  const double dx = x - px;
  const double dy = y - py;
  const double r2 = dx * dx + dy * dy;
  return metric_of_r2(metric, r2) - w;
}

bool isa_available(Isa isa) noexcept;
Isa best_available_isa() noexcept;

// Variant used by the unqualified entry points. Defaults to the best
// available one; AVT_FORCE_SCALAR=1 in the environment pins the scalar path.
Isa active_isa() noexcept;
void set_active_isa(Isa isa);

void nearest_two(Isa isa, Metric metric, std::span<const double> xs, std::span<const double> ys,
                 const SiteTable& sites, const NearestTwo& out);
void group_min(Isa isa, Metric metric, std::span<const double> xs, std::span<const double> ys,
               const SiteTable& sites, std::span<const std::uint8_t> in_group, const GroupMin& out);

inline void nearest_two(Metric metric, std::span<const double> xs, std::span<const double> ys,
                        const SiteTable& sites, const NearestTwo& out) {
  nearest_two(active_isa(), metric, xs, ys, sites, out);
}
inline void group_min(Metric metric, std::span<const double> xs, std::span<const double> ys,
                      const SiteTable& sites, std::span<const std::uint8_t> in_group, const GroupMin& out) {
  group_min(active_isa(), metric, xs, ys, sites, in_group, out);
}

}  // namespace avt::kernels
