#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avt/kernels.hpp"
#include "avt/measure.hpp"

namespace avt {

enum class FamilyKind { kEuclidean, kSquaredEuclidean, kConvexTranslate, kConcaveOfNorm };

// A system of distance functions d_p(z) in which every site gets a translate
// of the same cost: either a gauge h(z - p) or a radial profile l(|z - p|).
// Immutable and stateless; evaluation is safe from any number of threads.
class DistanceFamily {
 public:
  using Gauge = std::function<double(std::span<const double> displacement)>;
  using RadialProfile = std::function<double(double radius)>;

  static DistanceFamily euclidean();
  static DistanceFamily squared_euclidean();
  // h(v) = (sum |v_i|^p)^(1/p), p in (1, inf).
  static DistanceFamily pnorm(double p);
  // l(r) = sqrt(r).
  static DistanceFamily concave_sqrt();
  static DistanceFamily convex_translate(Gauge gauge, std::string name);
  static DistanceFamily concave_of_norm(RadialProfile profile, std::string name);

  // "euclidean" | "sqeuclidean" | "pnorm:<p>" | "concave-sqrt"
  static DistanceFamily parse(std::string_view selector);

  FamilyKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  // Set for presets that the SIMD kernels evaluate natively (planar only).
  std::optional<kernels::Metric> kernel_metric() const noexcept { return kernel_metric_; }

  // d_p(z) without dimension checks.
  double operator()(std::span<const double> p, std::span<const double> z) const;

 private:
  DistanceFamily(FamilyKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  FamilyKind kind_;
  std::string name_;
  Gauge gauge_;
  RadialProfile profile_;
  std::optional<kernels::Metric> kernel_metric_;
};

double distance(const DistanceFamily& family, std::span<const double> p, std::span<const double> z);

// d_p(z) - d_q(z). Negative inside R_0(p, q), zero on the unweighted bisector.
double diff(const DistanceFamily& family, std::span<const double> p, std::span<const double> q,
            std::span<const double> z);

// Sweep interval for the sublevel regions {z : d_p(z) - d_q(z) < gamma}
// relative to the atoms of a measure: no atom lies in the region for
// gamma <= lower, every atom does for gamma >= upper.
struct GammaRange {
  double lower = 0.0;
  double upper = 0.0;
};

GammaRange gamma_range(const DistanceFamily& family, std::span<const double> p,
                       std::span<const double> q, const AtomicMeasure& measure);

// max over ordered site pairs of gamma_range(...).upper. Sites are given as
// positions, row-major with the measure's dimension.
double max_gamma_bound(const DistanceFamily& family, std::span<const double> site_positions,
                       const AtomicMeasure& measure);

struct AdmissibilityReport {
  bool monotone = true;
  double max_jump = 0.0;
  GammaRange range;
  std::vector<double> gammas;
  std::vector<double> region_mass;
};

// Mass of {z : d_p(z) - d_q(z) < gamma} on `steps` uniform gammas spanning
// gamma_range; a discrete probe of monotone continuous growth from 0 to the
// total mass.
AdmissibilityReport probe_admissibility(const DistanceFamily& family, std::span<const double> p,
                                        std::span<const double> q, const AtomicMeasure& measure,
                                        std::size_t steps);

}  // namespace avt
