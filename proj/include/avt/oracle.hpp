#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "avt/diagram.hpp"
#include "avt/measure.hpp"
#include "avt/metrics.hpp"
#include "avt/solver.hpp"

namespace avt {

struct Flow {
  std::size_t atom = 0;
  std::size_t site = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<Flow> flows;          // positive flows only, sorted by (atom, site)
  double total_cost = 0.0;          // sum of mass * d_site(atom) in unscaled reals
  std::vector<double> site_potentials;  // optimal duals for the sites, unscaled
  std::size_t pivots = 0;
};

struct OracleLimits {
  std::size_t max_atoms = 20000;
  std::size_t max_sites = 64;
  double cost_scale = 1e9;  // costs are rounded to integers after scaling
};

// Exact min-cost plan of the transportation problem atoms x sites with
// cost d_p(z). Throws kInfeasible when demands and masses disagree beyond
// 1e-9 and kTooLarge beyond the limits.
TransportPlan solve_lp(std::span<const Site> sites, const DistanceFamily& family,
                       const AtomicMeasure& measure, const OracleLimits& limits = {});

struct SlackViolation {
  std::size_t atom = 0;
  std::size_t site = 0;    // site receiving LP flow
  std::size_t better = 0;  // site with a strictly smaller weighted score
  double excess = 0.0;     // amount by which the slack tolerance is exceeded
};

struct CertificationReport {
  double voronoi_cost = 0.0;
  double lp_cost = 0.0;
  double relative_gap = 0.0;  // (voronoi - lp) / max(lp, eps)
  bool duals_match = true;
  // Atoms away from every weighted bisector (gap to runner-up > tie_tol)
  // that receive LP flow at some site other than their Voronoi owner.
  std::vector<std::size_t> mismatched_atoms;
  std::vector<SlackViolation> slack_violations;
  double max_demand_error = 0.0;  // max |region mass - demand| of the Voronoi plan
};

struct CertifyOptions {
  double slack_tol = 1e-7;
  double tie_tol = kDefaultTieTol;
  // LP flows at or below flow_tol * atom mass count as zero.
  double flow_tol = 1e-12;
  OracleLimits limits;
};

// Compares the Voronoi plan in `result` against the exact LP optimum and
// checks complementary slackness of every LP flow against the fitted
// weights. Throws kNotConverged unless result.converged.
CertificationReport certify(std::span<const Site> sites, const DistanceFamily& family,
                            const AtomicMeasure& measure, const SolveResult& result,
                            const CertifyOptions& options = {});

// Same comparison for an arbitrary weight vector and its assignment.
CertificationReport certify_assignment(std::span<const Site> sites, const DistanceFamily& family,
                                       const AtomicMeasure& measure, const WeightVector& weights,
                                       const Assignment& assignment, const CertifyOptions& options = {});

}  // namespace avt
