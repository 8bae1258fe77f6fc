#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "avt/diagram.hpp"
#include "avt/measure.hpp"
#include "avt/metrics.hpp"

namespace avt::io {

// CSV with header `x,y,demand`; one site per row, indexed in file order.
std::vector<Site> read_sites_csv(std::istream& in);
void write_sites_csv(std::ostream& out, std::span<const Site> sites);

// A plain JSON array of reals.
WeightVector read_weights_json(std::istream& in);
void write_weights_json(std::ostream& out, const WeightVector& w);

// One row per share: atom_index,x,y,mass,site_index,fraction.
void write_assignment_csv(std::ostream& out, const Assignment& assignment, const AtomicMeasure& measure);

// Winning site of every raster cell, evaluated at the cell center.
// Row-major, row 0 on top. A cell whose best scores lie within tie_tol is a
// tie; its label is the lowest tied index.
struct LabelRaster {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> label;
  std::vector<std::uint8_t> tie;
};

LabelRaster label_raster(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                         const GridGeometry& grid, double tie_tol = kDefaultTieTol);

// The fixed 16-colour palette, cycled by site index.
std::array<std::uint8_t, 3> palette_color(std::size_t site);

// Binary PPM (P6); tie cells are black.
void write_ppm(std::ostream& out, const LabelRaster& raster);
// Plain PGM (P2) of labels, maxval = max(1, highest label).
void write_label_pgm(std::ostream& out, const LabelRaster& raster);
// JSON array of [row, col] for every tie cell.
void write_tie_json(std::ostream& out, const LabelRaster& raster);

}  // namespace avt::io
