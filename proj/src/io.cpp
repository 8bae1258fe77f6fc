#include "avt/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "avt/error.hpp"

namespace avt::io {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": not a number: '" + text + "'");
  }
}

}  // namespace

std::vector<Site> read_sites_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<Site> sites;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"x", "y", "demand"}) {
        throw Error(ErrorCode::kParse, "sites file must start with the header x,y,demand");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    Site site;
    site.position = {parse_real(fields[0], line_no), parse_real(fields[1], line_no)};
    site.demand = parse_real(fields[2], line_no);
    site.index = sites.size();
    sites.push_back(std::move(site));
  }
  if (!header_seen) throw Error(ErrorCode::kParse, "sites file is empty");
  return sites;
}

void write_sites_csv(std::ostream& out, std::span<const Site> sites) {
  out << "x,y,demand\n";
  out.precision(17);
  for (const Site& s : sites) {
    if (s.position.size() != 2) throw Error(ErrorCode::kDimensionMismatch, "sites CSV is planar");
    out << s.position[0] << ',' << s.position[1] << ',' << s.demand << '\n';
  }
}

WeightVector read_weights_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("weights JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::kParse, "weights JSON must be an array of numbers");
  std::vector<double> w;
  for (const auto& v : doc) {
    if (!v.is_number()) throw Error(ErrorCode::kParse, "weights JSON must be an array of numbers");
    w.push_back(v.get<double>());
  }
  return WeightVector(std::move(w));
}

void write_weights_json(std::ostream& out, const WeightVector& w) {
  nlohmann::json doc = nlohmann::json::array();
  for (double v : w.values()) doc.push_back(v);
  out << doc.dump() << '\n';
}

void write_assignment_csv(std::ostream& out, const Assignment& assignment, const AtomicMeasure& measure) {
  if (assignment.atom_count() != measure.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "assignment does not match the measure");
  }
  if (measure.dimension() != 2) throw Error(ErrorCode::kDimensionMismatch, "assignment CSV is planar");
  out << "atom_index,x,y,mass,site_index,fraction\n";
  char buf[160];
  for (std::size_t a = 0; a < measure.size(); ++a) {
    const auto z = measure.position(a);
    for (const Share& s : assignment.shares(a)) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%u,%.17g\n", a, z[0], z[1], measure.mass(a),
                    s.site, s.fraction);
      out << buf;
    }
  }
}

LabelRaster label_raster(std::span<const Site> sites, const WeightVector& w, const DistanceFamily& family,
                         const GridGeometry& grid, double tie_tol) {
  if (grid.rows == 0 || grid.cols == 0) throw Error(ErrorCode::kInvalidArgument, "empty raster");
  std::vector<double> centers;
  centers.reserve(grid.rows * grid.cols * 2);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const auto p = grid.cell_center(r, c);
      centers.push_back(p[0]);
      centers.push_back(p[1]);
    }
  }
  const AtomicMeasure cells(2, std::move(centers), std::vector<double>(grid.rows * grid.cols, 1.0));
  const ScoreSummary summary = score_summary(sites, w, family, cells);

  LabelRaster raster;
  raster.rows = grid.rows;
  raster.cols = grid.cols;
  raster.label.resize(cells.size());
  raster.tie.assign(cells.size(), 0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (summary.runner_up[i] - summary.best_score[i] <= tie_tol) {
      raster.tie[i] = 1;
      const auto tied = tied_sites(sites, w, family, cells, i, tie_tol);
      raster.label[i] = static_cast<std::int32_t>(*std::min_element(tied.begin(), tied.end()));
    } else {
      raster.label[i] = summary.best[i];
    }
  }
  return raster;
}

std::array<std::uint8_t, 3> palette_color(std::size_t site) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 16> kPalette{{
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240},  {240, 50, 230},
      {210, 245, 60},  {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
      {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195},
  }};
  return kPalette[site % kPalette.size()];
}

void write_ppm(std::ostream& out, const LabelRaster& raster) {
  out << "P6\n" << raster.cols << ' ' << raster.rows << "\n255\n";
  std::vector<char> bytes;
  bytes.reserve(raster.label.size() * 3);
  for (std::size_t i = 0; i < raster.label.size(); ++i) {
    std::array<std::uint8_t, 3> rgb{0, 0, 0};
    if (!raster.tie[i]) rgb = palette_color(static_cast<std::size_t>(raster.label[i]));
    for (auto ch : rgb) bytes.push_back(static_cast<char>(ch));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_label_pgm(std::ostream& out, const LabelRaster& raster) {
  std::int32_t maxval = 1;
  for (auto l : raster.label) maxval = std::max(maxval, l);
  if (maxval > 65535) throw Error(ErrorCode::kInvalidArgument, "too many sites for a PGM label image");
  out << "P2\n" << raster.cols << ' ' << raster.rows << '\n' << maxval << '\n';
  for (std::size_t r = 0; r < raster.rows; ++r) {
    for (std::size_t c = 0; c < raster.cols; ++c) {
      if (c) out << ' ';
      out << raster.label[r * raster.cols + c];
    }
    out << '\n';
  }
}

void write_tie_json(std::ostream& out, const LabelRaster& raster) {
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < raster.tie.size(); ++i) {
    if (raster.tie[i]) doc.push_back({i / raster.cols, i % raster.cols});
  }
  out << doc.dump() << '\n';
}

}  // namespace avt::io
