#include "avt/measure.hpp"

#include <cctype>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "avt/error.hpp"
#include "avt/summation.hpp"

namespace avt {

std::array<double, 2> GridGeometry::cell_center(std::size_t r, std::size_t c) const {
  const double x = origin[0] + (static_cast<double>(c) + 0.5) * cell_size;
  const double y = origin[1] + (static_cast<double>(rows - 1 - r) + 0.5) * cell_size;
  return {x, y};
}

AtomicMeasure::AtomicMeasure(std::size_t dimension, std::vector<double> positions,
                             std::vector<double> masses, std::optional<bool> connectivity_hint)
    : dimension_(dimension),
      positions_(std::move(positions)),
      masses_(std::move(masses)),
      total_mass_(0.0),
      connected_(connectivity_hint) {
  if (dimension_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "dimension must be positive");
  }
  if (masses_.empty()) {
    throw Error(ErrorCode::kEmptyMeasure, "no atoms");
  }
  if (positions_.size() != masses_.size() * dimension_) {
    throw Error(ErrorCode::kDimensionMismatch, "position array does not match atom count");
  }
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::kInvalidDensity, "atom masses must be positive and finite");
    }
  }
  for (double p : positions_) {
    if (!std::isfinite(p)) throw Error(ErrorCode::kInvalidArgument, "non-finite atom position");
  }
  total_mass_ = compensated_sum(masses_);

  axes_.assign(dimension_, std::vector<double>(masses_.size()));
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    for (std::size_t k = 0; k < dimension_; ++k) axes_[k][i] = positions_[i * dimension_ + k];
  }
}

AtomicMeasure AtomicMeasure::with_connectivity_hint(std::optional<bool> hint) const {
  AtomicMeasure copy = *this;
  copy.connected_ = hint;
  return copy;
}

AtomicMeasure AtomicMeasure::with_grid(GridGeometry grid) const {
  if (grid.atom_cell.size() != size()) {
    throw Error(ErrorCode::kInvalidArgument, "grid geometry does not cover every atom");
  }
  AtomicMeasure copy = *this;
  copy.grid_ = std::move(grid);
  return copy;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::kInvalidArgument, "scale factor must be positive");
  }
  std::vector<double> masses(masses_.size());
  for (std::size_t i = 0; i < masses_.size(); ++i) masses[i] = masses_[i] * factor;
  AtomicMeasure out(dimension_, positions_, std::move(masses), connected_);
  out.grid_ = grid_;
  return out;
}

namespace {

bool positive_cells_connected(const DensityGrid& grid) {
  const std::size_t n = grid.rows * grid.cols;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack;
  std::size_t positive = 0;
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.values[i] > 0.0) {
      ++positive;
      if (start == n) start = i;
    }
  }
  if (positive == 0) return false;
  std::size_t reached = 0;
  stack.push_back(start);
  seen[start] = 1;
  while (!stack.empty()) {
    const std::size_t cell = stack.back();
    stack.pop_back();
    ++reached;
    const std::size_t r = cell / grid.cols;
    const std::size_t c = cell % grid.cols;
    auto visit = [&](std::size_t rr, std::size_t cc) {
      const std::size_t next = rr * grid.cols + cc;
      if (!seen[next] && grid.values[next] > 0.0) {
        seen[next] = 1;
        stack.push_back(next);
      }
    };
    if (r > 0) visit(r - 1, c);
    if (r + 1 < grid.rows) visit(r + 1, c);
    if (c > 0) visit(r, c - 1);
    if (c + 1 < grid.cols) visit(r, c + 1);
  }
  return reached == positive;
}

}  // namespace

AtomicMeasure from_grid(const DensityGrid& grid, double cell_size, std::array<double, 2> origin) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::kInvalidArgument, "cell_size must be positive");
  }
  if (grid.values.size() != grid.rows * grid.cols) {
    throw Error(ErrorCode::kInvalidDensity, "grid value count does not match its shape");
  }
  GridGeometry geometry{grid.rows, grid.cols, cell_size, origin, {}};
  std::vector<double> positions;
  std::vector<double> masses;
  const double cell_area = cell_size * cell_size;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double density = grid.at(r, c);
      if (!(density >= 0.0) || !std::isfinite(density)) {
        throw Error(ErrorCode::kInvalidDensity,
                    "cell (" + std::to_string(r) + ", " + std::to_string(c) + ") is negative or not finite");
      }
      if (density == 0.0) continue;
      const auto center = geometry.cell_center(r, c);
      positions.push_back(center[0]);
      positions.push_back(center[1]);
      masses.push_back(density * cell_area);
      geometry.atom_cell.push_back(static_cast<std::uint32_t>(r * grid.cols + c));
    }
  }
  if (masses.empty()) throw Error(ErrorCode::kEmptyMeasure, "grid has no positive cell");
  AtomicMeasure measure(2, std::move(positions), std::move(masses), positive_cells_connected(grid));
  return measure.with_grid(std::move(geometry));
}

AtomicMeasure normalize(const AtomicMeasure& measure) {
  return measure.scaled(1.0 / measure.total_mass());
}

DensityGrid uniform_grid(std::size_t rows, std::size_t cols, double value) {
  return DensityGrid{rows, cols, std::vector<double>(rows * cols, value)};
}

namespace {

double parse_real(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  std::size_t tail = used;
  while (tail < token.size() && std::isspace(static_cast<unsigned char>(token[tail]))) ++tail;
  if (used == 0 || tail != token.size()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": not a number: '" + token + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

DensityGrid read_density_csv(std::istream& in) {
  DensityGrid grid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const double v = parse_real(trim(cell), line_no);
      if (v < 0.0 || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidDensity, "line " + std::to_string(line_no) + ": negative density");
      }
      row.push_back(v);
    }
    if (grid.rows == 0) {
      grid.cols = row.size();
    } else if (row.size() != grid.cols) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": ragged row");
    }
    grid.values.insert(grid.values.end(), row.begin(), row.end());
    ++grid.rows;
  }
  if (grid.rows == 0 || grid.cols == 0) throw Error(ErrorCode::kEmptyMeasure, "density file has no values");
  return grid;
}

DensityGrid read_density_pgm(std::istream& in) {
  auto next_token = [&in]() -> std::string {
    std::string token;
    char ch = 0;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        if (!token.empty()) return token;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!token.empty()) return token;
        continue;
      }
      token.push_back(ch);
    }
    return token;
  };
  auto next_int = [&](const char* what) -> long long {
    const std::string token = next_token();
    if (token.empty()) throw Error(ErrorCode::kParse, std::string("PGM truncated before ") + what);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw Error(ErrorCode::kParse, std::string("PGM bad ") + what + ": " + token);
    return v;
  };

  if (next_token() != "P2") throw Error(ErrorCode::kParse, "expected plain PGM magic 'P2'");
  const long long cols = next_int("width");
  const long long rows = next_int("height");
  const long long maxval = next_int("maxval");
  if (cols <= 0 || rows <= 0) throw Error(ErrorCode::kParse, "PGM dimensions must be positive");
  if (maxval <= 0 || maxval >= 65536) throw Error(ErrorCode::kParse, "PGM maxval out of range");

  DensityGrid grid{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), {}};
  grid.values.reserve(grid.rows * grid.cols);
  for (std::size_t i = 0; i < grid.rows * grid.cols; ++i) {
    const long long px = next_int("pixel");
    if (px < 0 || px > maxval) throw Error(ErrorCode::kInvalidDensity, "pixel outside [0, maxval]");
    grid.values.push_back(static_cast<double>(px) / static_cast<double>(maxval));
  }
  return grid;
}

}  // namespace avt
