#include "avt/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "avt/error.hpp"
#include "avt/kernels.hpp"
#include "avt/summation.hpp"

namespace avt {

void validate_sites(std::span<const Site> sites, std::size_t dimension) {
  if (sites.empty()) throw Error(ErrorCode::kEmptySites, "at least one site is required");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Site& s = sites[i];
    if (s.position.size() != dimension) {
      throw Error(ErrorCode::kDimensionMismatch, "site " + std::to_string(i) + " has dimension " +
                                                     std::to_string(s.position.size()));
    }
    if (!(s.demand > 0.0) || !std::isfinite(s.demand)) {
      throw Error(ErrorCode::kInvalidSites, "site " + std::to_string(i) + " demand must be positive");
    }
    if (s.index != i) throw Error(ErrorCode::kInvalidSites, "site index must equal its list position");
    for (double c : s.position) {
      if (!std::isfinite(c)) throw Error(ErrorCode::kInvalidSites, "non-finite site coordinate");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (sites[j].position == s.position) {
        throw Error(ErrorCode::kInvalidSites,
                    "sites " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
}

std::vector<double> site_positions(std::span<const Site> sites) {
  std::vector<double> out;
  for (const Site& s : sites) out.insert(out.end(), s.position.begin(), s.position.end());
  return out;
}

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
  for (double v : w_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "weights must be finite");
  }
}

WeightVector WeightVector::shifted(double c) const {
  std::vector<double> out(w_);
  for (double& v : out) v += c;
  return WeightVector(std::move(out));
}

double WeightVector::min() const { return *std::min_element(w_.begin(), w_.end()); }
double WeightVector::max() const { return *std::max_element(w_.begin(), w_.end()); }

Assignment::Assignment(std::vector<std::uint32_t> offsets, std::vector<Share> shares,
                       std::size_t site_count, std::span<const double> atom_masses)
    : offsets_(std::move(offsets)), shares_(std::move(shares)) {
  if (offsets_.size() != atom_masses.size() + 1 || offsets_.back() != shares_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "assignment layout does not match the measure");
  }
  std::vector<CompensatedSum> acc(site_count);
  for (std::size_t a = 0; a + 1 < offsets_.size(); ++a) {
    for (std::uint32_t k = offsets_[a]; k < offsets_[a + 1]; ++k) {
      const Share& s = shares_[k];
      if (s.site >= site_count) throw Error(ErrorCode::kInvalidArgument, "share names an unknown site");
      acc[s.site].add(s.fraction * atom_masses[a]);
    }
  }
  region_mass_.resize(site_count);
  for (std::size_t i = 0; i < site_count; ++i) region_mass_[i] = acc[i].value();
}

std::uint32_t Assignment::dominant_site(std::size_t atom) const {
  const auto s = shares(atom);
  std::uint32_t best = s.front().site;
  double frac = s.front().fraction;
  for (const Share& sh : s.subspan(1)) {
    if (sh.fraction > frac || (sh.fraction == frac && sh.site < best)) {
      best = sh.site;
      frac = sh.fraction;
    }
  }
  return best;
}

namespace {

bool use_kernels(const DistanceFamily& family, const AtomicMeasure& measure) {
  return family.kernel_metric().has_value() && measure.dimension() == 2;
}

struct SiteColumns {
  std::vector<double> x, y;
  explicit SiteColumns(std::span<const Site> sites) {
    for (const Site& s : sites) {
      x.push_back(s.position[0]);
      y.push_back(s.position[1]);
    }
  }
};

void check_inputs(std::span<const Site> sites, const WeightVector& w, const AtomicMeasure& measure) {
  if (sites.empty()) throw Error(ErrorCode::kEmptySites, "assign needs at least one site");
  if (w.size() != sites.size()) throw Error(ErrorCode::kDimensionMismatch, "weight vector length");
  for (const Site& s : sites) {
    if (s.position.size() != measure.dimension()) {
      throw Error(ErrorCode::kDimensionMismatch, "site dimension differs from the measure");
    }
  }
}

double site_score(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                  const AtomicMeasure& measure, std::size_t atom, std::size_t j) {
  if (use_kernels(family, measure)) {
    return kernels::score(*family.kernel_metric(), measure.axis(0)[atom], measure.axis(1)[atom],
                          sites[j].position[0], sites[j].position[1], w[j]);
  }
  return family(sites[j].position, measure.position(atom)) - w[j];
}

}  // namespace

ScoreSummary score_summary(std::span<const Site> sites, const WeightVector& w,
                           const DistanceFamily& family, const AtomicMeasure& measure) {
  check_inputs(sites, w, measure);
  const std::size_t count = measure.size();
  ScoreSummary out{std::vector<std::int32_t>(count), std::vector<double>(count), std::vector<double>(count)};
  if (use_kernels(family, measure)) {
    const SiteColumns cols(sites);
    const kernels::SiteTable table{cols.x, cols.y, w.values()};
    kernels::nearest_two(*family.kernel_metric(), measure.axis(0), measure.axis(1), table,
                         {out.best, out.best_score, out.runner_up});
    return out;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count; ++a) {
    double best = inf;
    double second = inf;
    std::int32_t arg = 0;
    const auto z = measure.position(a);
    for (std::size_t j = 0; j < sites.size(); ++j) {
      const double s = family(sites[j].position, z) - w[j];
      if (s < best) {
        second = best;
        best = s;
        arg = static_cast<std::int32_t>(j);
      } else if (s < second) {
        second = s;
      }
    }
    out.best[a] = arg;
    out.best_score[a] = best;
    out.runner_up[a] = second;
  }
  return out;
}

std::vector<std::uint32_t> tied_sites(std::span<const Site> sites, const WeightVector& w,
                                      const DistanceFamily& family, const AtomicMeasure& measure,
                                      std::size_t atom, double tie_tol) {
  std::vector<double> scores(sites.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sites.size(); ++j) {
    scores[j] = site_score(sites, w, family, measure, atom, j);
    best = std::min(best, scores[j]);
  }
  std::vector<std::uint32_t> out;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (scores[j] - best <= tie_tol) out.push_back(static_cast<std::uint32_t>(j));
  }
  return out;
}

Assignment assign(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                  const AtomicMeasure& measure, double tie_tol) {
  if (!(tie_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tie_tol must be nonnegative");
  const ScoreSummary summary = score_summary(sites, w, family, measure);
  const std::size_t count = measure.size();
  std::vector<std::uint32_t> offsets;
  std::vector<Share> shares;
  offsets.reserve(count + 1);
  shares.reserve(count);
  offsets.push_back(0);
  for (std::size_t a = 0; a < count; ++a) {
    if (summary.runner_up[a] - summary.best_score[a] <= tie_tol) {
      const auto tied = tied_sites(sites, w, family, measure, a, tie_tol);
      const double fraction = 1.0 / static_cast<double>(tied.size());
      for (std::uint32_t j : tied) shares.push_back({j, fraction});
    } else {
      shares.push_back({static_cast<std::uint32_t>(summary.best[a]), 1.0});
    }
    offsets.push_back(static_cast<std::uint32_t>(shares.size()));
  }
  return Assignment(std::move(offsets), std::move(shares), sites.size(), measure.masses());
}

Excess excess(const Assignment& assignment, std::span<const Site> sites) {
  if (assignment.site_count() != sites.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "assignment and site list differ in length");
  }
  const auto mass = assignment.region_mass();
  CompensatedSum demand_total;
  CompensatedSum mass_total;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    demand_total.add(sites[i].demand);
    mass_total.add(mass[i]);
  }
  const double scale = std::max(1.0, mass_total.value());
  if (std::abs(demand_total.value() - mass_total.value()) > 1e-9 * scale) {
    throw Error(ErrorCode::kDemandMismatch, "demands sum to " + std::to_string(demand_total.value()) +
                                                " but the measure has mass " +
                                                std::to_string(mass_total.value()));
  }
  Excess ex;
  ex.phi.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) ex.phi[i] = mass[i] - sites[i].demand;
  ex.tau = *std::max_element(ex.phi.begin(), ex.phi.end());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (ex.phi[i] >= ex.tau - kExcessTieTol) {
      ex.max_set.push_back(i);
    } else if (!ex.tau_prime || ex.phi[i] > *ex.tau_prime) {
      ex.tau_prime = ex.phi[i];
    }
  }
  return ex;
}

double transport_cost(const Assignment& assignment, std::span<const Site> sites,
                      const DistanceFamily& family, const AtomicMeasure& measure) {
  if (assignment.atom_count() != measure.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "assignment does not match the measure");
  }
  CompensatedSum cost;
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto z = measure.position(a);
    for (const Share& s : assignment.shares(a)) {
      cost.add(s.fraction * measure.mass(a) * family(sites[s.site].position, z));
    }
  }
  return cost.value();
}

double objective(const Assignment& assignment, std::span<const Site> sites) {
  const Excess ex = excess(assignment, sites);
  CompensatedSum acc;
  for (double p : ex.phi) acc.add(p * p);
  return acc.value();
}

double split_mass(const Assignment& assignment, const AtomicMeasure& measure) {
  CompensatedSum acc;
  for (std::size_t a = 0; a < measure.size(); ++a) {
    if (assignment.is_split(a)) acc.add(measure.mass(a));
  }
  return acc.value();
}

}  // namespace avt
