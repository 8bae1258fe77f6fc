#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace avt {

// Row-major raster of nonnegative densities. Row 0 is the top row.
struct DensityGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Placement of a grid-born measure: which raster cell each atom came from.
struct GridGeometry {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 1.0;
  std::array<double, 2> origin{0.0, 0.0};
  std::vector<std::uint32_t> atom_cell;  // row-major cell index per atom

  // Center of raster cell (r, c); row 0 sits at the highest y.
  std::array<double, 2> cell_center(std::size_t r, std::size_t c) const;
};

// A finite measure made of point atoms with strictly positive masses.
// Immutable after construction.
class AtomicMeasure {
 public:
  AtomicMeasure(std::size_t dimension, std::vector<double> positions,
                std::vector<double> masses,
                std::optional<bool> connectivity_hint = std::nullopt);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return masses_.size(); }
  double total_mass() const noexcept { return total_mass_; }

  std::span<const double> position(std::size_t atom) const {
    return {positions_.data() + atom * dimension_, dimension_};
  }
  double mass(std::size_t atom) const { return masses_[atom]; }
  std::span<const double> masses() const noexcept { return masses_; }
  std::span<const double> positions() const noexcept { return positions_; }

  // Coordinate k of every atom, contiguous (structure-of-arrays view).
  std::span<const double> axis(std::size_t k) const { return axes_[k]; }

  std::optional<bool> connectivity_hint() const noexcept { return connected_; }
  const std::optional<GridGeometry>& grid() const noexcept { return grid_; }

  AtomicMeasure with_connectivity_hint(std::optional<bool> hint) const;
  AtomicMeasure with_grid(GridGeometry grid) const;
  AtomicMeasure scaled(double factor) const;

 private:
  std::size_t dimension_;
  std::vector<double> positions_;
  std::vector<std::vector<double>> axes_;
  std::vector<double> masses_;
  double total_mass_;
  std::optional<bool> connected_;
  std::optional<GridGeometry> grid_;
};

// One atom per strictly positive cell, at the cell center, with mass
// density * cell_size^2. The connectivity hint is set from 4-neighbour
// connectivity of the positive cells.
AtomicMeasure from_grid(const DensityGrid& grid, double cell_size,
                        std::array<double, 2> origin = {0.0, 0.0});

AtomicMeasure normalize(const AtomicMeasure& measure);

DensityGrid uniform_grid(std::size_t rows, std::size_t cols, double value = 1.0);

// Comma-separated rows of nonnegative reals, uniform row length.
DensityGrid read_density_csv(std::istream& in);
// Plain (P2) PGM; density = pixel / maxval.
DensityGrid read_density_pgm(std::istream& in);

}  // namespace avt
