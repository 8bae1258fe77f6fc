#include "avt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "avt/error.hpp"
#include "avt/kernels.hpp"
#include "avt/summation.hpp"
#include "maxflow.hpp"

namespace avt {

void SolverConfig::validate() const {
  if (!(phi_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "phi_tol must be positive");
  if (!(delta_root_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta_root_tol must be positive");
  if (!(d_bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "d_bound must be positive");
  if (!(tie_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tie_tol must be nonnegative");
  if (max_outer_iters == 0) throw Error(ErrorCode::kInvalidArgument, "max_outer_iters must be positive");
}

SolverConfig default_config(std::span<const Site> sites, const DistanceFamily& family,
                            const AtomicMeasure& measure) {
  validate_sites(sites, measure.dimension());
  SolverConfig cfg;
  const double total = measure.total_mass();
  const double per_site = 1e-6 * total;
  cfg.phi_tol = per_site * per_site;
  const double levels = std::ceil(std::log2(total / per_site));
  cfg.max_outer_iters = 10 * sites.size() * static_cast<std::size_t>(std::max(1.0, levels));
  const auto positions = site_positions(sites);
  cfg.d_bound = sites.size() > 1 ? max_gamma_bound(family, positions, measure) : 1.0;
  if (!(cfg.d_bound > 0.0)) cfg.d_bound = 1.0;
  return cfg;
}

namespace {

void check_demands(std::span<const Site> sites, const AtomicMeasure& measure) {
  CompensatedSum total;
  for (const Site& s : sites) total.add(s.demand);
  const double scale = std::max(1.0, measure.total_mass());
  if (std::abs(total.value() - measure.total_mass()) > 1e-9 * scale) {
    throw Error(ErrorCode::kDemandMismatch, "demands sum to " + std::to_string(total.value()) +
                                                ", measure mass is " + std::to_string(measure.total_mass()));
  }
}

double sum_of_squares(std::span<const double> v) {
  CompensatedSum acc;
  for (double x : v) acc.add(x * x);
  return acc.value();
}

}  // namespace

Descent::Descent(std::span<const Site> sites, const DistanceFamily& family, const AtomicMeasure& measure,
                 WeightVector w0, double tie_tol)
    : sites_(sites.begin(), sites.end()),
      family_(&family),
      measure_(&measure),
      tie_tol_(tie_tol),
      w_(std::move(w0)) {
  validate_sites(sites_, measure.dimension());
  check_demands(sites_, measure);
  if (w_.size() != sites_.size()) throw Error(ErrorCode::kDimensionMismatch, "initial weight vector length");
  const Assignment start = assign(sites_, w_, family, measure, tie_tol_);
  owner_.assign(measure.size(), -1);
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto shares = start.shares(a);
    if (shares.size() == 1) {
      owner_[a] = static_cast<std::int32_t>(shares[0].site);
    } else {
      split_.emplace(static_cast<std::uint32_t>(a), std::vector<Share>(shares.begin(), shares.end()));
    }
  }
  refresh();
}

void Descent::refresh() {
  std::vector<CompensatedSum> acc(sites_.size());
  for (std::size_t a = 0; a < owner_.size(); ++a) {
    const double m = measure_->mass(a);
    if (owner_[a] >= 0) {
      acc[static_cast<std::size_t>(owner_[a])].add(m);
    } else {
      for (const Share& s : split_.at(static_cast<std::uint32_t>(a))) acc[s.site].add(s.fraction * m);
    }
  }
  region_mass_.resize(sites_.size());
  std::vector<double> phi(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    region_mass_[i] = acc[i].value();
    phi[i] = region_mass_[i] - sites_[i].demand;
  }
  objective_ = sum_of_squares(phi);
}

Excess Descent::excess() const { return avt::excess(assignment(), sites_); }

Assignment Descent::assignment() const {
  std::vector<std::uint32_t> offsets{0};
  std::vector<Share> shares;
  offsets.reserve(owner_.size() + 1);
  shares.reserve(owner_.size());
  for (std::size_t a = 0; a < owner_.size(); ++a) {
    if (owner_[a] >= 0) {
      shares.push_back({static_cast<std::uint32_t>(owner_[a]), 1.0});
    } else {
      const auto& s = split_.at(static_cast<std::uint32_t>(a));
      shares.insert(shares.end(), s.begin(), s.end());
    }
    offsets.push_back(static_cast<std::uint32_t>(shares.size()));
  }
  return Assignment(std::move(offsets), std::move(shares), sites_.size(), measure_->masses());
}

double Descent::score(std::size_t atom, std::size_t site) const {
  if (family_->kernel_metric() && measure_->dimension() == 2) {
    return kernels::score(*family_->kernel_metric(), measure_->axis(0)[atom], measure_->axis(1)[atom],
                          sites_[site].position[0], sites_[site].position[1], w_[site]);
  }
  return (*family_)(sites_[site].position, measure_->position(atom)) - w_[site];
}

double Descent::group_share(std::size_t atom, std::span<const std::uint8_t> in_group) const {
  if (owner_[atom] >= 0) return in_group[static_cast<std::size_t>(owner_[atom])] ? 1.0 : 0.0;
  double f = 0.0;
  for (const Share& s : split_.at(static_cast<std::uint32_t>(atom))) {
    if (in_group[s.site]) f += s.fraction;
  }
  return f;
}

std::vector<std::uint32_t> Descent::recipients(std::size_t atom, std::span<const std::uint8_t> in_group,
                                               double rest_min) const {
  std::vector<std::uint32_t> out;
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    if (!in_group[j] && score(atom, j) - rest_min <= tie_tol_) out.push_back(static_cast<std::uint32_t>(j));
  }
  return out;
}

StepRecord Descent::step(GroupRule rule) {
  const std::size_t n = sites_.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = region_mass_[i] - sites_[i].demand;

  // Distinct excess levels, highest first; sites within kExcessTieTol of a
  // level share it.
  std::vector<double> sorted(phi);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> levels;
  for (double v : sorted) {
    if (levels.empty() || v < levels.back() - kExcessTieTol) levels.push_back(v);
  }

  StepRecord rec;
  rec.phi_before = objective_;
  rec.phi_after = objective_;
  rec.tau = levels.front();
  if (!(objective_ > 0.0)) return rec;

  // Start from the chosen top group. When rounding leaves it no strictly
  // improving step, it absorbs the next excess level and the step is retried.
  std::size_t first = 0;
  if (rule == GroupRule::kWidestGap) {
    double widest = -1.0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      if (levels[k] - levels[k + 1] > widest) {
        widest = levels[k] - levels[k + 1];
        first = k;
      }
    }
  }
  for (std::size_t k = first; k + 1 < levels.size(); ++k) {
    std::vector<std::uint8_t> in_group(n, 0);
    StepRecord attempt;
    attempt.phi_before = objective_;
    attempt.phi_after = objective_;
    attempt.tau = rec.tau;
    attempt.tau_prime = levels[k + 1];
    for (std::size_t i = 0; i < n; ++i) {
      if (phi[i] >= levels[k] - kExcessTieTol) {
        in_group[i] = 1;
        attempt.max_set.push_back(i);
      }
    }
    attempt.target = (attempt.tau - *attempt.tau_prime) / (2.0 * static_cast<double>(n));
    if (try_group(in_group, phi, attempt)) return attempt;
    if (k == first) {
      rec.max_set = attempt.max_set;
      rec.tau_prime = attempt.tau_prime;
      rec.target = attempt.target;
    }
  }
  return rec;
}

bool Descent::try_group(std::span<const std::uint8_t> in_group, std::span<const double> phi, StepRecord& rec) {
  const std::size_t n = sites_.size();

  // Score minima over the group and over the rest, per atom.
  const std::size_t count = measure_->size();
  std::vector<double> gmin(count), rmin(count);
  std::vector<std::int32_t> rarg(count);
  if (family_->kernel_metric() && measure_->dimension() == 2) {
    std::vector<double> sx(n), sy(n);
    for (std::size_t j = 0; j < n; ++j) {
      sx[j] = sites_[j].position[0];
      sy[j] = sites_[j].position[1];
    }
    kernels::group_min(*family_->kernel_metric(), measure_->axis(0), measure_->axis(1),
                       {sx, sy, w_.values()}, in_group, {gmin, rmin, rarg});
  } else {
    for (std::size_t a = 0; a < count; ++a) {
      double g = std::numeric_limits<double>::infinity();
      double r = g;
      std::int32_t arg = -1;
      for (std::size_t j = 0; j < n; ++j) {
        const double s = score(a, j);
        if (in_group[j]) {
          g = std::min(g, s);
        } else if (s < r) {
          r = s;
          arg = static_cast<std::int32_t>(j);
        }
      }
      gmin[a] = g;
      rmin[a] = r;
      rarg[a] = arg;
    }
  }

  // An atom's group share moves to the rest once the group weights have
  // dropped by its threshold rest_min - group_min.
  struct Candidate {
    double threshold;
    double movable;
    std::uint32_t atom;
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < count; ++a) {
    const double f = group_share(a, in_group);
    if (f > 0.0) candidates.push_back({rmin[a] - gmin[a], f * measure_->mass(a), static_cast<std::uint32_t>(a)});
  }
  if (candidates.empty()) return false;
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return l.threshold < r.threshold || (l.threshold == r.threshold && l.atom < r.atom);
  });

  std::size_t crossing = candidates.size() - 1;
  double before = 0.0;
  {
    CompensatedSum cum;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (cum.value() + candidates[i].movable >= rec.target) {
        crossing = i;
        break;
      }
      cum.add(candidates[i].movable);
    }
    before = cum.value();
  }
  const double crossing_threshold = candidates[crossing].threshold;
  std::size_t overshoot_end = crossing + 1;
  while (overshoot_end < candidates.size() && candidates[overshoot_end].threshold <= crossing_threshold) {
    ++overshoot_end;
  }
  const double delta = std::max(crossing_threshold, 0.0);

  std::vector<std::vector<std::uint32_t>> receivers(overshoot_end);
  for (std::size_t i = 0; i < overshoot_end; ++i) {
    const std::uint32_t a = candidates[i].atom;
    receivers[i] = recipients(a, in_group, rmin[a]);
    if (receivers[i].empty()) receivers[i].push_back(static_cast<std::uint32_t>(rarg[a]));
  }

  auto commit = [&](std::size_t i, double beta) {
    const std::uint32_t a = candidates[i].atom;
    std::vector<Share> shares;
    if (owner_[a] >= 0) {
      shares.push_back({static_cast<std::uint32_t>(owner_[a]), 1.0});
    } else {
      shares = split_.at(a);
    }
    std::vector<Share> next;
    for (const Share& s : shares) {
      const double f = in_group[s.site] ? s.fraction * (1.0 - beta) : s.fraction;
      if (f > 0.0) next.push_back({s.site, f});
    }
    const double each = beta * group_share(a, in_group) / static_cast<double>(receivers[i].size());
    for (std::uint32_t j : receivers[i]) {
      auto it = std::find_if(next.begin(), next.end(), [j](const Share& s) { return s.site == j; });
      if (it != next.end()) {
        it->fraction += each;
      } else {
        next.push_back({j, each});
      }
    }
    std::sort(next.begin(), next.end(), [](const Share& l, const Share& r) { return l.site < r.site; });
    if (next.size() == 1) {
      owner_[a] = static_cast<std::int32_t>(next[0].site);
      split_.erase(a);
    } else {
      owner_[a] = -1;
      split_[a] = std::move(next);
    }
  };

  // Applies a plan, keeps it only if the recomputed objective strictly drops.
  const double phi_before = objective_;
  const WeightVector w_before = w_;
  const std::vector<double> mass_before = region_mass_;
  auto attempt = [&](std::size_t full, double partial) {
    std::vector<std::pair<std::uint32_t, std::int32_t>> saved_owner;
    std::vector<std::pair<std::uint32_t, std::vector<Share>>> saved_split;
    auto save = [&](std::size_t i) {
      const std::uint32_t a = candidates[i].atom;
      saved_owner.emplace_back(a, owner_[a]);
      if (owner_[a] < 0) saved_split.emplace_back(a, split_.at(a));
    };
    for (std::size_t i = 0; i < full; ++i) save(i);
    if (partial > 0.0) save(full);

    for (std::size_t i = 0; i < n; ++i) {
      if (in_group[i]) w_[i] -= delta;
    }
    for (std::size_t i = 0; i < full; ++i) commit(i, 1.0);
    if (partial > 0.0) commit(full, partial);
    refresh();
    if (objective_ < phi_before) return true;

    w_ = w_before;
    for (const auto& [a, o] : saved_owner) {
      owner_[a] = o;
      if (o >= 0) split_.erase(a);
    }
    for (auto& [a, s] : saved_split) split_[a] = std::move(s);
    region_mass_ = mass_before;
    objective_ = phi_before;
    return false;
  };

  rec.mode = StepMode::kOvershoot;
  bool accepted = attempt(overshoot_end, 0.0);
  if (!accepted) {
    const double partial = std::clamp((rec.target - before) / candidates[crossing].movable, 0.0, 1.0);
    rec.mode = StepMode::kExactFill;
    accepted = (crossing > 0 || partial > 0.0) && attempt(crossing, partial);
  }
  if (!accepted) {
    rec.mode = StepMode::kStalled;
    return false;
  }

  double transferred = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_group[i]) transferred += phi[i] - (region_mass_[i] - sites_[i].demand);
  }
  rec.delta = delta;
  rec.transferred = transferred;
  rec.phi_after = objective_;
  return true;
}

bool Descent::rebalance_ties() {
  const std::size_t n = sites_.size();
  const ScoreSummary summary = score_summary(sites_, w_, *family_, *measure_);
  std::vector<std::size_t> tie_atoms;
  std::vector<CompensatedSum> firm(n);
  for (std::size_t a = 0; a < measure_->size(); ++a) {
    if (summary.runner_up[a] - summary.best_score[a] <= tie_tol_) {
      tie_atoms.push_back(a);
      continue;
    }
    const double m = measure_->mass(a);
    if (owner_[a] >= 0) {
      firm[static_cast<std::size_t>(owner_[a])].add(m);
    } else {
      for (const Share& s : split_.at(static_cast<std::uint32_t>(a))) firm[s.site].add(s.fraction * m);
    }
  }
  if (tie_atoms.empty()) return false;

  // source -> tie atom -> tied site -> sink
  const std::size_t source = 0;
  const std::size_t sink = 1 + tie_atoms.size() + n;
  detail::MaxFlow flow(sink + 1, 1e-18 * measure_->total_mass());
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> arcs(tie_atoms.size());
  for (std::size_t k = 0; k < tie_atoms.size(); ++k) {
    const std::size_t a = tie_atoms[k];
    const double m = measure_->mass(a);
    flow.add_arc(source, 1 + k, m);
    for (std::uint32_t j : tied_sites(sites_, w_, *family_, *measure_, a, tie_tol_)) {
      arcs[k].push_back({j, flow.add_arc(1 + k, 1 + tie_atoms.size() + j, m)});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double residual = sites_[j].demand - firm[j].value();
    if (residual > 0.0) flow.add_arc(1 + tie_atoms.size() + j, sink, residual);
  }
  flow.run(source, sink);

  std::vector<std::int32_t> owner = owner_;
  auto split = split_;
  for (std::size_t k = 0; k < tie_atoms.size(); ++k) {
    const std::size_t a = tie_atoms[k];
    const double m = measure_->mass(a);
    std::vector<Share> shares;
    double routed = 0.0;
    for (const auto& [site, id] : arcs[k]) {
      const double f = flow.flow(id) / m;
      routed += f;
      if (f > 0.0) shares.push_back({site, f});
    }
    if (routed < 1.0) {
      // Unrouted remainder stays with the lowest-scoring tied site.
      const std::uint32_t site = arcs[k].front().first;
      auto it = std::find_if(shares.begin(), shares.end(), [site](const Share& s) { return s.site == site; });
      if (it != shares.end()) {
        it->fraction += 1.0 - routed;
      } else {
        shares.push_back({site, 1.0 - routed});
      }
    }
    std::sort(shares.begin(), shares.end(), [](const Share& l, const Share& r) { return l.site < r.site; });
    if (shares.size() == 1) {
      owner[a] = static_cast<std::int32_t>(shares[0].site);
      split.erase(static_cast<std::uint32_t>(a));
    } else {
      owner[a] = -1;
      split[static_cast<std::uint32_t>(a)] = std::move(shares);
    }
  }

  const double old_objective = objective_;
  std::swap(owner, owner_);
  std::swap(split, split_);
  refresh();
  if (objective_ <= old_objective) return true;
  std::swap(owner, owner_);
  std::swap(split, split_);
  refresh();
  return false;
}

void Descent::shift_weights(double c) {
  std::vector<double> w(w_.values().begin(), w_.values().end());
  for (double& v : w) v += c;
  w_ = WeightVector(std::move(w));
}

void Descent::clamp_empty_regions() {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (w_[i] < 0.0 && region_mass_[i] == 0.0) w_[i] = 0.0;
  }
}

double loss(std::span<const Site> sites, const WeightVector& w, std::span<const std::size_t> group,
            double delta, const DistanceFamily& family, const AtomicMeasure& measure, double tie_tol) {
  if (group.empty() || group.size() >= sites.size()) {
    throw Error(ErrorCode::kInvalidArgument, "group must be a nonempty proper subset of the sites");
  }
  if (!(delta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be nonnegative");
  if (delta == 0.0) return 0.0;
  WeightVector lowered = w;
  for (std::size_t t : group) {
    if (t >= sites.size()) throw Error(ErrorCode::kInvalidArgument, "group names an unknown site");
    lowered[t] -= delta;
  }
  const Assignment a0 = assign(sites, w, family, measure, tie_tol);
  const Assignment a1 = assign(sites, lowered, family, measure, tie_tol);
  CompensatedSum acc;
  for (std::size_t t : group) {
    acc.add(a0.region_mass()[t]);
    acc.add(-a1.region_mass()[t]);
  }
  return acc.value();
}

double solve_delta(std::span<const Site> sites, const WeightVector& w, std::span<const std::size_t> group,
                   double target, const DistanceFamily& family, const AtomicMeasure& measure, double tol,
                   double tie_tol) {
  if (!(target > 0.0)) throw Error(ErrorCode::kInvalidArgument, "target must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  const auto positions = site_positions(sites);
  const double bound = max_gamma_bound(family, positions, measure);
  // Loss is saturated past 2D plus the spread of the current weights.
  const double spread = w.max() - w.min();
  double lo = 0.0;
  double hi = 2.0 * bound + spread + 2.0 * tie_tol + tol;
  if (loss(sites, w, group, hi, family, measure, tie_tol) < target) {
    throw Error(ErrorCode::kTargetOverflow, "target exceeds the mass held by the group");
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (loss(sites, w, group, mid, family, measure, tie_tol) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

DescentStep descend_step(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                         const AtomicMeasure& measure, double tie_tol, GroupRule rule) {
  Descent state(sites, family, measure, w, tie_tol);
  if (!(state.objective() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "descend_step called on a solved weight vector");
  }
  StepRecord rec = state.step(rule);
  return {state.weights(), state.assignment(), std::move(rec)};
}

SolveResult fit_weights(std::span<const Site> sites, const DistanceFamily& family, const AtomicMeasure& measure,
                        const SolverConfig& config, std::optional<WeightVector> w0) {
  config.validate();
  validate_sites(sites, measure.dimension());
  check_demands(sites, measure);
  Descent state(sites, family, measure, w0 ? *w0 : WeightVector::zeros(sites.size()), config.tie_tol);

  SolveResult result;
  result.d_bound = config.d_bound;
  result.phi_trace.push_back(state.objective());
  while (state.objective() > config.phi_tol && result.outer_iters < config.max_outer_iters) {
    StepRecord rec = state.step(config.group_rule);
    if (rec.mode == StepMode::kStalled) break;
    ++result.outer_iters;
    result.phi_trace.push_back(rec.phi_after);
    result.steps.push_back(std::move(rec));
  }
  result.converged = state.objective() <= config.phi_tol;
  if (result.converged) state.rebalance_ties();

  // Shift so the largest weight is D; sites left negative then have empty
  // regions and may be raised to 0. Finally pin the smallest weight to 0.
  state.shift_weights(config.d_bound - state.weights().max());
  state.clamp_empty_regions();
  state.shift_weights(-state.weights().min());

  result.weights = state.weights();
  result.assignment = state.assignment();
  result.phi_final = state.objective();
  return result;
}

UniquenessReport check_uniqueness(std::span<const Site> sites, const DistanceFamily& family,
                                  const AtomicMeasure& measure, const SolverConfig& config,
                                  std::size_t n_starts, std::uint64_t seed) {
  if (n_starts < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two starts");
  if (measure.connectivity_hint() != true) {
    throw Error(ErrorCode::kInvalidArgument, "uniqueness only holds on a measure flagged as connected");
  }
  UniquenessReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(0.0, config.d_bound);
  for (std::size_t s = 0; s < n_starts; ++s) {
    std::vector<double> w0(sites.size());
    for (double& v : w0) v = draw(rng);
    SolveResult r = fit_weights(sites, family, measure, config, WeightVector(std::move(w0)));
    if (!r.converged) {
      ++report.failed_runs;
      continue;
    }
    ++report.converged_runs;
    report.solutions.push_back(r.weights.shifted(-r.weights.min()));
  }
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < report.solutions.size(); ++j) {
      for (std::size_t k = 0; k < sites.size(); ++k) {
        report.max_normalized_weight_spread =
            std::max(report.max_normalized_weight_spread,
                     std::abs(report.solutions[i][k] - report.solutions[j][k]));
      }
    }
  }
  return report;
}

}  // namespace avt
