#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "avt/diagram.hpp"
#include "avt/measure.hpp"
#include "avt/metrics.hpp"

namespace avt {

// Which top-excess sites have their weights lowered in a step.
enum class GroupRule {
  // Sites within 1e-12 of the maximum excess.
  kMaxExcess,
  // All sites above the widest gap between consecutive excess levels. The
  // gap exceeds the group's internal spread / (2n - 1), which keeps the
  // step strictly decreasing; it avoids the tiny steps kMaxExcess takes
  // while two sites hold almost the same excess.
  kWidestGap,
};

struct SolverConfig {
  double phi_tol = 1e-12;          // stop once the objective is at or below this (mass^2)
  std::size_t max_outer_iters = 1000;
  double delta_root_tol = 1e-12;   // bisection width for solve_delta
  double d_bound = 1.0;            // max over site pairs of the upper sweep bound
  double tie_tol = kDefaultTieTol;
  GroupRule group_rule = GroupRule::kWidestGap;

  void validate() const;
};

// phi_tol = (1e-6 * total mass)^2, iteration budget
// 10 * n * ceil(log2(total / sqrt(phi_tol))), d_bound from the measure.
SolverConfig default_config(std::span<const Site> sites, const DistanceFamily& family,
                            const AtomicMeasure& measure);

enum class StepMode {
  kOvershoot,  // smallest step whose transferred mass reaches the target
  kExactFill,  // boundary atom split so the transfer equals the target
  kStalled,    // no strictly improving step exists in floating point
};

struct StepRecord {
  double phi_before = 0.0;
  double phi_after = 0.0;
  double tau = 0.0;
  std::optional<double> tau_prime;  // highest excess outside max_set
  // Sites whose weights were lowered: the max-excess set, widened by whole
  // excess levels only when rounding blocks every improving step.
  std::vector<std::size_t> max_set;
  double target = 0.0;
  double delta = 0.0;
  double transferred = 0.0;
  StepMode mode = StepMode::kStalled;
};

// Mutable state of the weight descent: the weights plus the (possibly
// fractional) ownership of every atom. Shares are only ever split among
// sites tied within tie_tol, so the state is always a weighted Voronoi
// assignment of its weights. Holds references to family and measure.
class Descent {
 public:
  Descent(std::span<const Site> sites, const DistanceFamily& family, const AtomicMeasure& measure,
          WeightVector w0, double tie_tol = kDefaultTieTol);

  const WeightVector& weights() const noexcept { return w_; }
  std::span<const double> region_mass() const noexcept { return region_mass_; }
  double objective() const noexcept { return objective_; }
  Excess excess() const;
  Assignment assignment() const;

  // Lower the weights of the top-excess group chosen by `rule` so that mass
  // (tau - tau') / 2n leaves it. An accepted step strictly lowers the
  // recomputed objective; otherwise the state is left unchanged and the
  // record says kStalled. Requires objective() > 0.
  StepRecord step(GroupRule rule = GroupRule::kWidestGap);

  // Re-split tied atoms (max-flow over tie atoms and their tied sites) so
  // region masses match demands. Kept only if the objective does not grow.
  bool rebalance_ties();

  // Adds c to every weight; ownership is unchanged.
  void shift_weights(double c);
  // Raise every negative weight of a site with an empty region to zero.
  void clamp_empty_regions();

 private:
  void refresh();
  // One step with the weights of `in_group` lowered; false (state unchanged)
  // when no strictly improving step exists for this group.
  bool try_group(std::span<const std::uint8_t> in_group, std::span<const double> phi, StepRecord& rec);
  double group_share(std::size_t atom, std::span<const std::uint8_t> in_group) const;
  std::vector<std::uint32_t> recipients(std::size_t atom, std::span<const std::uint8_t> in_group,
                                        double rest_min) const;
  double score(std::size_t atom, std::size_t site) const;

  std::vector<Site> sites_;
  const DistanceFamily* family_;
  const AtomicMeasure* measure_;
  double tie_tol_;
  WeightVector w_;
  std::vector<std::int32_t> owner_;                             // -1 when split
  std::map<std::uint32_t, std::vector<Share>> split_;           // atom -> shares
  std::vector<double> region_mass_;
  double objective_ = 0.0;
};

// Mass leaving the sites in `group` when their weights drop by delta,
// sum_{t in group} (phi_t(w) - phi_t(w'(delta))), from fresh assignments.
double loss(std::span<const Site> sites, const WeightVector& w, std::span<const std::size_t> group,
            double delta, const DistanceFamily& family, const AtomicMeasure& measure,
            double tie_tol = kDefaultTieTol);

// Smallest delta (within tol) with loss(delta) >= target, by bisection on
// [0, 2 D + margin]. Throws kTargetOverflow when the target is unreachable.
double solve_delta(std::span<const Site> sites, const WeightVector& w, std::span<const std::size_t> group,
                   double target, const DistanceFamily& family, const AtomicMeasure& measure,
                   double tol, double tie_tol = kDefaultTieTol);

struct DescentStep {
  WeightVector weights;
  Assignment assignment;
  StepRecord record;
};

// One descent step started from the equal-split assignment of w.
DescentStep descend_step(std::span<const Site> sites, const WeightVector& w,
                         const DistanceFamily& family, const AtomicMeasure& measure,
                         double tie_tol = kDefaultTieTol, GroupRule rule = GroupRule::kWidestGap);

struct SolveResult {
  WeightVector weights;  // normalized so the smallest entry is 0
  Assignment assignment;
  double phi_final = 0.0;
  std::size_t outer_iters = 0;
  bool converged = false;
  double d_bound = 0.0;
  std::vector<double> phi_trace;  // objective before the first step and after each step
  std::vector<StepRecord> steps;
};

// Throws kDemandMismatch if demands do not sum to the measure's mass; a
// spent iteration budget yields converged == false, never an exception.
SolveResult fit_weights(std::span<const Site> sites, const DistanceFamily& family,
                        const AtomicMeasure& measure, const SolverConfig& config,
                        std::optional<WeightVector> w0 = std::nullopt);

struct UniquenessReport {
  double max_normalized_weight_spread = 0.0;
  std::size_t converged_runs = 0;
  std::size_t failed_runs = 0;
  std::vector<WeightVector> solutions;
};

// Fits from n_starts seeded random initial weights (uniform in [0, D]) and
// reports the largest sup-norm distance between normalized solutions.
// The measure must carry a "connected" hint.
UniquenessReport check_uniqueness(std::span<const Site> sites, const DistanceFamily& family,
                                  const AtomicMeasure& measure, const SolverConfig& config,
                                  std::size_t n_starts, std::uint64_t seed);

}  // namespace avt
