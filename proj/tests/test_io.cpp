#include <doctest.h>

#include <sstream>

#include "avt/error.hpp"
#include "avt/io.hpp"

using namespace avt;

TEST_CASE("sites csv round trip") {
  std::istringstream in("x,y,demand\n0.25,0.5,0.75\n# comment\n0.75, 0.5 ,0.25\n");
  const auto sites = io::read_sites_csv(in);
  REQUIRE(sites.size() == 2);
  CHECK(sites[1].position[1] == 0.5);
  CHECK(sites[1].demand == 0.25);
  CHECK(sites[1].index == 1);
  std::ostringstream out;
  io::write_sites_csv(out, sites);
  std::istringstream again(out.str());
  const auto back = io::read_sites_csv(again);
  CHECK(back[0].position == sites[0].position);
  CHECK(back[0].demand == sites[0].demand);
}

TEST_CASE("sites csv errors") {
  for (const char* text : {"", "a,b,c\n1,2,3\n", "x,y,demand\n1,2\n", "x,y,demand\n1,2,z\n"}) {
    std::istringstream in(text);
    CHECK_THROWS_AS(io::read_sites_csv(in), Error);
  }
}

TEST_CASE("weights json round trip") {
  const WeightVector w({0.0, 0.1, 1.0 / 3.0});
  std::ostringstream out;
  io::write_weights_json(out, w);
  std::istringstream in(out.str());
  const WeightVector back = io::read_weights_json(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == w[i]);
  std::istringstream bad("{\"w\": 1}");
  CHECK_THROWS_AS(io::read_weights_json(bad), Error);
  std::istringstream junk("[1, \"a\"]");
  CHECK_THROWS_AS(io::read_weights_json(junk), Error);
}

TEST_CASE("assignment csv has one row per share") {
  const AtomicMeasure m(2, {0.25, 0.5, 0.75, 0.5, 0.25, 0.5, 0.75, 0.5}, {0.25, 0.25, 0.25, 0.25});
  const std::vector<Site> sites{{{0.25, 0.5}, 0.5, 0}, {{0.75, 0.5}, 0.5, 1}};
  const Assignment a = assign(sites, WeightVector({0.5, 0.0}), DistanceFamily::euclidean(), m);
  std::ostringstream out;
  io::write_assignment_csv(out, a, m);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "atom_index,x,y,mass,site_index,fraction");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("label rasters, images and tie sidecar") {
  const AtomicMeasure m = from_grid(uniform_grid(4, 4), 0.25);
  const std::vector<Site> sites{{{0.25, 0.25}, 0.5, 0}, {{0.75, 0.75}, 0.5, 1}};
  const io::LabelRaster r = io::label_raster(sites, WeightVector::zeros(2), DistanceFamily::euclidean(), *m.grid());
  for (std::size_t row = 0; row < 4; ++row) {
    for (std::size_t col = 0; col < 4; ++col) {
      const std::size_t i = row * 4 + col;
      CHECK(static_cast<bool>(r.tie[i]) == (row == col));
      if (row == col) CHECK(r.label[i] == 0);
    }
  }
  std::ostringstream pgm;
  io::write_label_pgm(pgm, r);
  CHECK(pgm.str().rfind("P2\n4 4\n1\n", 0) == 0);
  std::ostringstream ppm;
  io::write_ppm(ppm, r);
  const std::string bytes = ppm.str();
  const std::string header = "P6\n4 4\n255\n";
  REQUIRE(bytes.size() == header.size() + 48);
  CHECK(bytes.compare(0, header.size(), header) == 0);
  CHECK(bytes[header.size()] == 0);  // (0,0) is a tie pixel
  std::ostringstream ties;
  io::write_tie_json(ties, r);
  CHECK(ties.str() == "[[0,0],[1,1],[2,2],[3,3]]\n");
  CHECK(io::palette_color(0) == io::palette_color(16));
  CHECK(io::palette_color(0) != io::palette_color(1));
}
