#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "avt/measure.hpp"
#include "avt/metrics.hpp"

namespace avt {

inline constexpr double kDefaultTieTol = 1e-9;

struct Site {
  std::vector<double> position;
  double demand = 0.0;
  std::size_t index = 0;
};

// Throws kEmptySites / kInvalidSites / kDimensionMismatch. Checks positive
// finite demands, pairwise distinct positions and index == position in list.
void validate_sites(std::span<const Site> sites, std::size_t dimension);

// Row-major site positions, the layout metrics::max_gamma_bound expects.
std::vector<double> site_positions(std::span<const Site> sites);

class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> weights);
  static WeightVector zeros(std::size_t n) { return WeightVector(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  double& operator[](std::size_t i) { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }

  WeightVector shifted(double c) const;
  double min() const;
  double max() const;

 private:
  std::vector<double> w_;
};

struct Share {
  std::uint32_t site = 0;
  double fraction = 0.0;
};

// Transport plan of the diagram: every atom is owned by one site, or split
// among sites tied at the minimum of d_j(z) - w_j.
class Assignment {
 public:
  Assignment() = default;
  // offsets has atom_count + 1 entries into shares (CSR layout).
  Assignment(std::vector<std::uint32_t> offsets, std::vector<Share> shares, std::size_t site_count,
             std::span<const double> atom_masses);

  std::size_t atom_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t site_count() const noexcept { return region_mass_.size(); }

  std::span<const Share> shares(std::size_t atom) const {
    return {shares_.data() + offsets_[atom], offsets_[atom + 1] - offsets_[atom]};
  }
  bool is_split(std::size_t atom) const { return offsets_[atom + 1] - offsets_[atom] > 1; }
  std::span<const double> region_mass() const noexcept { return region_mass_; }

  // Lowest-indexed site holding the largest share of the atom.
  std::uint32_t dominant_site(std::size_t atom) const;

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<Share> shares_;
  std::vector<double> region_mass_;
};

// Sites within tie_tol of the minimum share an atom equally; the rest goes to
// the unique argmin. Pure function of its inputs.
Assignment assign(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                  const AtomicMeasure& measure, double tie_tol = kDefaultTieTol);

// Per-atom minimum of d_j(z) - w_j and the gap to the runner-up (infinity
// for a single site), evaluated through the same kernels as assign().
struct ScoreSummary {
  std::vector<std::int32_t> best;
  std::vector<double> best_score;
  std::vector<double> runner_up;
};
ScoreSummary score_summary(std::span<const Site> sites, const WeightVector& w,
                           const DistanceFamily& family, const AtomicMeasure& measure);

// Every site whose score at atom `atom` is within tie_tol of the minimum.
std::vector<std::uint32_t> tied_sites(std::span<const Site> sites, const WeightVector& w,
                                      const DistanceFamily& family, const AtomicMeasure& measure,
                                      std::size_t atom, double tie_tol);

inline constexpr double kExcessTieTol = 1e-12;

struct Excess {
  std::vector<double> phi;               // region mass minus demand
  double tau = 0.0;                      // max phi
  std::optional<double> tau_prime;       // max phi outside max_set; none if max_set is everything
  std::vector<std::size_t> max_set;      // sites within kExcessTieTol of tau
};

// Throws kDemandMismatch if demands do not sum to the assigned mass (1e-9).
Excess excess(const Assignment& assignment, std::span<const Site> sites);

// sum over shares of fraction * mass(z) * d_site(z).
double transport_cost(const Assignment& assignment, std::span<const Site> sites,
                      const DistanceFamily& family, const AtomicMeasure& measure);

// Sum of squared excesses.
double objective(const Assignment& assignment, std::span<const Site> sites);

// Total mass of atoms split between two or more sites.
double split_mass(const Assignment& assignment, const AtomicMeasure& measure);

}  // namespace avt
