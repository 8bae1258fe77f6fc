#include "avt/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "avt/error.hpp"
#include "avt/summation.hpp"

namespace avt {

DistanceFamily DistanceFamily::euclidean() {
  DistanceFamily f(FamilyKind::kEuclidean, "euclidean");
  f.kernel_metric_ = kernels::Metric::kEuclidean;
  return f;
}

DistanceFamily DistanceFamily::squared_euclidean() {
  DistanceFamily f(FamilyKind::kSquaredEuclidean, "sqeuclidean");
  f.kernel_metric_ = kernels::Metric::kSquaredEuclidean;
  return f;
}

DistanceFamily DistanceFamily::pnorm(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::kInvalidArgument, "pnorm exponent must lie in (1, inf)");
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, p);
  DistanceFamily f(FamilyKind::kConvexTranslate, "pnorm:" + std::string(buf, res.ptr));
  f.gauge_ = [p](std::span<const double> v) {
    double acc = 0.0;
    for (double c : v) acc += std::pow(std::abs(c), p);
    return std::pow(acc, 1.0 / p);
  };
  return f;
}

DistanceFamily DistanceFamily::concave_sqrt() {
  DistanceFamily f(FamilyKind::kConcaveOfNorm, "concave-sqrt");
  f.profile_ = [](double r) { return std::sqrt(r); };
  f.kernel_metric_ = kernels::Metric::kConcaveSqrt;
  return f;
}

DistanceFamily DistanceFamily::convex_translate(Gauge gauge, std::string name) {
  if (!gauge) throw Error(ErrorCode::kInvalidArgument, "empty gauge callback");
  DistanceFamily f(FamilyKind::kConvexTranslate, std::move(name));
  f.gauge_ = std::move(gauge);
  return f;
}

DistanceFamily DistanceFamily::concave_of_norm(RadialProfile profile, std::string name) {
  if (!profile) throw Error(ErrorCode::kInvalidArgument, "empty profile callback");
  DistanceFamily f(FamilyKind::kConcaveOfNorm, std::move(name));
  f.profile_ = std::move(profile);
  return f;
}

DistanceFamily DistanceFamily::parse(std::string_view selector) {
  if (selector == "euclidean") return euclidean();
  if (selector == "sqeuclidean") return squared_euclidean();
  if (selector == "concave-sqrt") return concave_sqrt();
  constexpr std::string_view prefix = "pnorm:";
  if (selector.substr(0, prefix.size()) == prefix) {
    const std::string_view rest = selector.substr(prefix.size());
    double p = 0.0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), p);
    if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) {
      throw Error(ErrorCode::kParse, "bad pnorm exponent: '" + std::string(rest) + "'");
    }
    return pnorm(p);
  }
  throw Error(ErrorCode::kParse, "unknown metric selector: '" + std::string(selector) + "'");
}

double DistanceFamily::operator()(std::span<const double> p, std::span<const double> z) const {
  switch (kind_) {
    case FamilyKind::kEuclidean:
    case FamilyKind::kSquaredEuclidean:
    case FamilyKind::kConcaveOfNorm: {
      double r2 = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = z[k] - p[k];
        r2 += d * d;
      }
      if (kind_ == FamilyKind::kSquaredEuclidean) return r2;
      if (kind_ == FamilyKind::kEuclidean) return std::sqrt(r2);
      return profile_(std::sqrt(r2));
    }
    case FamilyKind::kConvexTranslate: {
      double buf[8];
      std::vector<double> heap;
      double* v = buf;
      if (z.size() > 8) {
        heap.resize(z.size());
        v = heap.data();
      }
      for (std::size_t k = 0; k < z.size(); ++k) v[k] = z[k] - p[k];
      return gauge_(std::span<const double>(v, z.size()));
    }
  }
  return 0.0;
}

double distance(const DistanceFamily& family, std::span<const double> p, std::span<const double> z) {
  if (p.size() != z.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "site has dimension " + std::to_string(p.size()) + ", point " + std::to_string(z.size()));
  }
  return family(p, z);
}

namespace {

bool same_point(std::span<const double> p, std::span<const double> q) {
  return std::equal(p.begin(), p.end(), q.begin(), q.end());
}

void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::kDimensionMismatch, "site dimensions differ");
  if (same_point(p, q)) throw Error(ErrorCode::kDegeneratePair, "sites coincide");
}

// Widen [lo, hi] by a few ulps so every sampled value is strictly inside.
GammaRange padded(double lo, double hi) {
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  const double pad = 4.0 * std::numeric_limits<double>::epsilon() * scale;
  return {lo - pad, hi + pad};
}

}  // namespace

double diff(const DistanceFamily& family, std::span<const double> p, std::span<const double> q,
            std::span<const double> z) {
  check_pair(p, q);
  if (z.size() != p.size()) throw Error(ErrorCode::kDimensionMismatch, "point dimension differs from sites");
  return family(p, z) - family(q, z);
}

GammaRange gamma_range(const DistanceFamily& family, std::span<const double> p,
                       std::span<const double> q, const AtomicMeasure& measure) {
  check_pair(p, q);
  if (p.size() != measure.dimension()) throw Error(ErrorCode::kDimensionMismatch, "sites vs measure");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto z = measure.position(a);
    const double v = family(p, z) - family(q, z);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return padded(lo, hi);
}

double max_gamma_bound(const DistanceFamily& family, std::span<const double> site_positions,
                       const AtomicMeasure& measure) {
  const std::size_t dim = measure.dimension();
  if (site_positions.size() % dim != 0) throw Error(ErrorCode::kDimensionMismatch, "site positions");
  const std::size_t n = site_positions.size() / dim;
  if (n < 2) return 0.0;
  std::vector<double> lo(n * n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n * n, -std::numeric_limits<double>::infinity());
  std::vector<double> d(n);
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto z = measure.position(a);
    for (std::size_t i = 0; i < n; ++i) d[i] = family(site_positions.subspan(i * dim, dim), z);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = d[i] - d[j];
        lo[i * n + j] = std::min(lo[i * n + j], v);
        hi[i * n + j] = std::max(hi[i * n + j], v);
      }
    }
  }
  double bound = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      check_pair(site_positions.subspan(i * dim, dim), site_positions.subspan(j * dim, dim));
      bound = std::max(bound, padded(lo[i * n + j], hi[i * n + j]).upper);
    }
  }
  return bound;
}

AdmissibilityReport probe_admissibility(const DistanceFamily& family, std::span<const double> p,
                                        std::span<const double> q, const AtomicMeasure& measure,
                                        std::size_t steps) {
  if (steps < 2) throw Error(ErrorCode::kInvalidArgument, "probe needs at least two steps");
  AdmissibilityReport report;
  report.range = gamma_range(family, p, q, measure);

  std::vector<std::pair<double, double>> by_diff(measure.size());
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto z = measure.position(a);
    by_diff[a] = {family(p, z) - family(q, z), measure.mass(a)};
  }
  std::sort(by_diff.begin(), by_diff.end());

  const double lo = report.range.lower;
  const double hi = report.range.upper;
  report.gammas.resize(steps);
  report.region_mass.resize(steps);
  CompensatedSum inside;
  std::size_t next = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double gamma =
        k + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
    while (next < by_diff.size() && by_diff[next].first < gamma) inside.add(by_diff[next++].second);
    report.gammas[k] = gamma;
    report.region_mass[k] = inside.value();
    if (k > 0) {
      const double jump = report.region_mass[k] - report.region_mass[k - 1];
      if (jump < 0.0) report.monotone = false;
      report.max_jump = std::max(report.max_jump, jump);
    }
  }
  return report;
}

}  // namespace avt
