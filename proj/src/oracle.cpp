#include "avt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "avt/error.hpp"
#include "avt/summation.hpp"
#include "network_simplex.hpp"

namespace avt {

TransportPlan solve_lp(std::span<const Site> sites, const DistanceFamily& family,
                       const AtomicMeasure& measure, const OracleLimits& limits) {
  validate_sites(sites, measure.dimension());
  const std::size_t atoms = measure.size();
  const std::size_t n = sites.size();
  if (atoms > limits.max_atoms || n > limits.max_sites) {
    throw Error(ErrorCode::kTooLarge, std::to_string(atoms) + " atoms x " + std::to_string(n) +
                                          " sites exceeds the oracle limits");
  }
  if (!(limits.cost_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cost_scale must be positive");

  CompensatedSum demand_sum;
  std::vector<double> demand(n);
  for (std::size_t j = 0; j < n; ++j) {
    demand[j] = sites[j].demand;
    demand_sum.add(demand[j]);
  }
  const double total = measure.total_mass();
  const double balance_tol = 1e-9 * std::max(1.0, total);
  if (std::abs(demand_sum.value() - total) > balance_tol) {
    throw Error(ErrorCode::kInfeasible, "demands sum to " + std::to_string(demand_sum.value()) +
                                            ", measure has mass " + std::to_string(total));
  }

  std::vector<double> dist(atoms * n);
  std::vector<std::int64_t> cost(atoms * n);
  constexpr double int_limit = 4e15;  // leaves room for the artificial cost
  for (std::size_t a = 0; a < atoms; ++a) {
    const auto z = measure.position(a);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = family(sites[j].position, z);
      const double scaled = std::round(d * limits.cost_scale);
      if (!std::isfinite(scaled) || scaled < 0.0 || scaled > int_limit / static_cast<double>(atoms + n + 1)) {
        throw Error(ErrorCode::kTooLarge, "scaled cost does not fit the exact solver");
      }
      dist[a * n + j] = d;
      cost[a * n + j] = static_cast<std::int64_t>(scaled);
    }
  }

  std::vector<double> supply(measure.masses().begin(), measure.masses().end());
  detail::NetworkSimplex simplex(std::move(supply), demand, std::move(cost));
  if (!simplex.run(balance_tol)) throw Error(ErrorCode::kInfeasible, "no feasible transport plan");
  if (!simplex.dual_feasible()) throw Error(ErrorCode::kInfeasible, "network simplex ended dual infeasible");

  TransportPlan plan;
  plan.pivots = simplex.pivots();
  CompensatedSum total_cost;
  for (std::size_t a = 0; a < atoms; ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      const double f = simplex.flow(a, j);
      if (f > 0.0) {
        plan.flows.push_back({a, j, f});
        total_cost.add(f * dist[a * n + j]);
      }
    }
  }
  plan.total_cost = total_cost.value();
  plan.site_potentials.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    plan.site_potentials[j] = static_cast<double>(simplex.sink_potential(j)) / limits.cost_scale;
  }
  return plan;
}

CertificationReport certify_assignment(std::span<const Site> sites, const DistanceFamily& family,
                                       const AtomicMeasure& measure, const WeightVector& weights,
                                       const Assignment& assignment, const CertifyOptions& options) {
  if (weights.size() != sites.size() || assignment.site_count() != sites.size() ||
      assignment.atom_count() != measure.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights, assignment and sites disagree in size");
  }
  CertificationReport report;
  report.voronoi_cost = transport_cost(assignment, sites, family, measure);
  for (std::size_t j = 0; j < sites.size(); ++j) {
    report.max_demand_error =
        std::max(report.max_demand_error, std::abs(assignment.region_mass()[j] - sites[j].demand));
  }

  const TransportPlan plan = solve_lp(sites, family, measure, options.limits);
  report.lp_cost = plan.total_cost;
  constexpr double eps = std::numeric_limits<double>::min();
  report.relative_gap = (report.voronoi_cost - report.lp_cost) / std::max(report.lp_cost, eps);

  const std::size_t n = sites.size();
  const ScoreSummary summary = score_summary(sites, weights, family, measure);
  std::vector<double> scores(n);
  std::size_t last_atom = std::numeric_limits<std::size_t>::max();
  for (const Flow& f : plan.flows) {
    if (f.mass <= options.flow_tol * measure.mass(f.atom)) continue;
    const auto z = measure.position(f.atom);
    if (f.atom != last_atom) {
      for (std::size_t j = 0; j < n; ++j) scores[j] = family(sites[j].position, z) - weights[j];
      last_atom = f.atom;
    }
    std::size_t better = f.site;
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] < scores[better]) better = j;
    }
    const double violation = scores[f.site] - scores[better] - options.slack_tol;
    if (violation > 0.0) {
      report.duals_match = false;
      report.slack_violations.push_back({f.atom, f.site, better, violation});
    }
    const bool tie = summary.runner_up[f.atom] - summary.best_score[f.atom] <= options.tie_tol;
    if (!tie && !assignment.is_split(f.atom) &&
        assignment.shares(f.atom)[0].site != f.site) {
      if (report.mismatched_atoms.empty() || report.mismatched_atoms.back() != f.atom) {
        report.mismatched_atoms.push_back(f.atom);
      }
    }
  }
  return report;
}

CertificationReport certify(std::span<const Site> sites, const DistanceFamily& family,
                            const AtomicMeasure& measure, const SolveResult& result,
                            const CertifyOptions& options) {
  if (!result.converged) throw Error(ErrorCode::kNotConverged, "certification needs a converged fit");
  return certify_assignment(sites, family, measure, result.weights, result.assignment, options);
}

}  // namespace avt
