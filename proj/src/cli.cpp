#include "avt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "avt/diagram.hpp"
#include "avt/error.hpp"
#include "avt/io.hpp"
#include "avt/measure.hpp"
#include "avt/metrics.hpp"
#include "avt/oracle.hpp"
#include "avt/solver.hpp"

namespace avt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Demand error allowed by solve and verify, relative to total mass.
constexpr double kDemandTolerance = 1e-6;
// verify succeeds when the Voronoi cost is within this of the LP optimum.
constexpr double kGapTolerance = 1e-6;

struct Options {
  std::string metric = "euclidean";
  std::string sites_path;
  std::string density_path;
  std::string format;  // empty: infer from the extension
  bool normalize = false;
  std::optional<double> cell_size;
  std::optional<double> phi_tol;
  std::optional<std::size_t> max_iters;
  std::optional<std::uint64_t> seed;
  double tie_tol = kDefaultTieTol;
  bool trace = false;
  std::string out_dir = ".";
  std::string weights_path;
  std::size_t probe_steps = 64;
};

// Inputs shared by every subcommand.
struct Problem {
  DistanceFamily family = DistanceFamily::euclidean();
  std::vector<Site> sites;
  AtomicMeasure measure;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

DensityGrid read_density(const Options& opt) {
  std::string format = opt.format;
  if (format.empty()) {
    const std::string ext = fs::path(opt.density_path).extension().string();
    format = ext == ".pgm" ? "pgm" : "csv";
  }
  auto in = open_input(opt.density_path);
  return format == "pgm" ? read_density_pgm(in) : read_density_csv(in);
}

AtomicMeasure load_measure(const Options& opt) {
  const DensityGrid grid = read_density(opt);
  const double cell = opt.cell_size ? *opt.cell_size : 1.0 / static_cast<double>(std::max(grid.rows, grid.cols));
  if (!(cell > 0.0) || !std::isfinite(cell)) throw Error(ErrorCode::kInvalidArgument, "cell size must be positive");
  AtomicMeasure m = from_grid(grid, cell);
  return opt.normalize ? normalize(m) : m;
}

Problem load_problem(const Options& opt) {
  Problem p{DistanceFamily::parse(opt.metric), {}, load_measure(opt)};
  auto in = open_input(opt.sites_path);
  p.sites = io::read_sites_csv(in);
  validate_sites(p.sites, p.measure.dimension());
  if (opt.normalize) {
    double total = 0.0;
    for (const Site& s : p.sites) total += s.demand;
    for (Site& s : p.sites) s.demand /= total;
  }
  double demand = 0.0;
  for (const Site& s : p.sites) demand += s.demand;
  const double mass = p.measure.total_mass();
  if (std::abs(demand - mass) > 1e-9 * std::max(1.0, mass)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "demands sum to " << demand << " but the density has mass " << mass
        << " (use --normalize for fractional demands)";
    throw Error(ErrorCode::kDemandMismatch, msg.str());
  }
  return p;
}

WeightVector load_weights(const Options& opt, std::size_t n) {
  auto in = open_input(opt.weights_path);
  WeightVector w = io::read_weights_json(in);
  if (w.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weights file has " + std::to_string(w.size()) + " entries for " + std::to_string(n) + " sites");
  }
  return w;
}

json mass_errors(const Assignment& a, std::span<const Site> sites) {
  json errors = json::array();
  for (std::size_t i = 0; i < sites.size(); ++i) errors.push_back(a.region_mass()[i] - sites[i].demand);
  return errors;
}

double max_abs(const json& values) {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v.get<double>()));
  return m;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

const char* mode_name(StepMode mode) {
  switch (mode) {
    case StepMode::kOvershoot: return "overshoot";
    case StepMode::kExactFill: return "exact-fill";
    case StepMode::kStalled: return "stalled";
  }
  return "unknown";
}

int cmd_solve(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  SolverConfig cfg = default_config(p.sites, p.family, p.measure);
  if (opt.phi_tol) cfg.phi_tol = *opt.phi_tol;
  if (opt.max_iters) cfg.max_outer_iters = *opt.max_iters;
  cfg.tie_tol = opt.tie_tol;
  cfg.validate();

  std::optional<WeightVector> w0;
  if (opt.seed) {
    std::mt19937_64 rng(*opt.seed);
    std::uniform_real_distribution<double> start(0.0, cfg.d_bound);
    std::vector<double> w(p.sites.size());
    for (double& v : w) v = start(rng);
    w0 = WeightVector(std::move(w));
  }
  const SolveResult r = fit_weights(p.sites, p.family, p.measure, cfg, w0);

  const fs::path dir(opt.out_dir);
  {
    auto f = open_output(dir / "weights.json");
    io::write_weights_json(f, r.weights);
  }
  {
    auto f = open_output(dir / "assignment.csv");
    io::write_assignment_csv(f, r.assignment, p.measure);
  }
  const json errors = mass_errors(r.assignment, p.sites);
  json report = {
      {"metric", p.family.name()},
      {"sites", p.sites.size()},
      {"atoms", p.measure.size()},
      {"total_mass", p.measure.total_mass()},
      {"phi_final", r.phi_final},
      {"phi_tol", cfg.phi_tol},
      {"iters", r.outer_iters},
      {"max_iters", cfg.max_outer_iters},
      {"converged", r.converged},
      {"mass_error", errors},
      {"max_mass_error", max_abs(errors)},
      {"split_mass", split_mass(r.assignment, p.measure)},
  };
  if (opt.seed) report["seed"] = *opt.seed;
  write_json(dir / "report.json", report);

  if (opt.trace) {
    json steps = json::array();
    for (const StepRecord& s : r.steps) {
      json rec = {{"phi_before", s.phi_before}, {"phi_after", s.phi_after}, {"tau", s.tau},
                  {"max_set", s.max_set},       {"target", s.target},       {"delta", s.delta},
                  {"transferred", s.transferred}, {"mode", mode_name(s.mode)}};
      rec["tau_prime"] = s.tau_prime ? json(*s.tau_prime) : json(nullptr);
      steps.push_back(std::move(rec));
    }
    write_json(dir / "trace.json", {{"phi_trace", r.phi_trace}, {"steps", steps}});
  }

  out << (r.converged ? "converged" : "not converged") << " after " << r.outer_iters
      << " iterations, phi = " << r.phi_final << '\n';
  return r.converged ? kOk : kNotSatisfied;
}

int cmd_assign(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  const WeightVector w = load_weights(opt, p.sites.size());
  const Assignment a = assign(p.sites, w, p.family, p.measure, opt.tie_tol);
  const fs::path dir(opt.out_dir);
  {
    auto f = open_output(dir / "assignment.csv");
    io::write_assignment_csv(f, a, p.measure);
  }
  json region = json::array();
  for (double v : a.region_mass()) region.push_back(v);
  const json report = {{"region_mass", region},
                       {"mass_error", mass_errors(a, p.sites)},
                       {"split_mass", split_mass(a, p.measure)}};
  out << report.dump(2) << '\n';
  return kOk;
}

int cmd_cost(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  const WeightVector w = load_weights(opt, p.sites.size());
  const Assignment a = assign(p.sites, w, p.family, p.measure, opt.tie_tol);
  json region = json::array();
  for (double v : a.region_mass()) region.push_back(v);
  const json report = {{"transport_cost", transport_cost(a, p.sites, p.family, p.measure)},
                       {"region_mass", region}};
  out << report.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  const WeightVector w = load_weights(opt, p.sites.size());
  // Tie atoms may be split in any proportion; pick the split that best
  // meets the demands before judging them.
  Descent state(p.sites, p.family, p.measure, w, opt.tie_tol);
  state.rebalance_ties();
  const Assignment a = state.assignment();
  const json errors = mass_errors(a, p.sites);
  const double max_error = max_abs(errors);
  const double allowed = kDemandTolerance * p.measure.total_mass();

  json report = {{"mass_error", errors}, {"max_mass_error", max_error}};
  int code = kOk;
  if (max_error > allowed) {
    report["demand_mismatch"] = true;
    code = kNotSatisfied;
  } else {
    CertifyOptions copt;
    copt.tie_tol = opt.tie_tol;
    const CertificationReport c = certify_assignment(p.sites, p.family, p.measure, w, a, copt);
    report["demand_mismatch"] = false;
    report["voronoi_cost"] = c.voronoi_cost;
    report["lp_cost"] = c.lp_cost;
    report["relative_gap"] = c.relative_gap;
    report["duals_match"] = c.duals_match;
    report["mismatched_atoms"] = c.mismatched_atoms;
    report["slack_violations"] = c.slack_violations.size();
    if (!(c.relative_gap <= kGapTolerance) || !c.duals_match) code = kNotSatisfied;
  }
  report["certified"] = code == kOk;
  write_json(fs::path(opt.out_dir) / "report.json", report);
  out << report.dump(2) << '\n';
  return code;
}

int cmd_render(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  const WeightVector w = load_weights(opt, p.sites.size());
  if (!p.measure.grid()) throw Error(ErrorCode::kInvalidArgument, "render needs a grid-born measure");
  const io::LabelRaster raster = io::label_raster(p.sites, w, p.family, *p.measure.grid(), opt.tie_tol);
  const fs::path dir(opt.out_dir);
  {
    auto f = open_output(dir / "diagram.ppm");
    io::write_ppm(f, raster);
  }
  {
    auto f = open_output(dir / "labels.pgm");
    io::write_label_pgm(f, raster);
  }
  {
    auto f = open_output(dir / "ties.json");
    io::write_tie_json(f, raster);
  }
  const auto ties = std::count(raster.tie.begin(), raster.tie.end(), 1);
  out << "rendered " << raster.cols << 'x' << raster.rows << " image, " << ties << " tie pixels\n";
  return kOk;
}

int cmd_probe(const Options& opt, std::ostream& out) {
  const Problem p = load_problem(opt);
  json pairs = json::array();
  bool all_monotone = true;
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    for (std::size_t j = 0; j < p.sites.size(); ++j) {
      if (i == j) continue;
      const AdmissibilityReport r =
          probe_admissibility(p.family, p.sites[i].position, p.sites[j].position, p.measure, opt.probe_steps);
      all_monotone = all_monotone && r.monotone;
      pairs.push_back({{"p", i},
                       {"q", j},
                       {"monotone", r.monotone},
                       {"max_jump", r.max_jump},
                       {"gamma_lower", r.range.lower},
                       {"gamma_upper", r.range.upper}});
    }
  }
  const json report = {{"metric", p.family.name()}, {"monotone", all_monotone}, {"pairs", pairs}};
  out << report.dump(2) << '\n';
  return kOk;
}

void add_problem_flags(CLI::App& cmd, Options& opt) {
  cmd.add_option("--metric", opt.metric, "euclidean | sqeuclidean | pnorm:<p> | concave-sqrt")
      ->capture_default_str();
  cmd.add_option("--sites", opt.sites_path, "CSV with header x,y,demand")->required();
  cmd.add_option("--density", opt.density_path, "density raster (CSV or plain PGM)")->required();
  cmd.add_option("--format", opt.format, "density format; inferred from the extension by default")
      ->check(CLI::IsMember({"csv", "pgm"}));
  cmd.add_flag("--normalize", opt.normalize, "rescale demands and density to unit mass");
  cmd.add_option("--cell-size", opt.cell_size, "raster cell edge length (default 1 / max(rows, cols))");
  cmd.add_option("--tie-tol", opt.tie_tol, "score gap below which an atom is shared")->capture_default_str();
  cmd.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
}

void add_weights_flag(CLI::App& cmd, Options& opt) {
  cmd.add_option("--weights", opt.weights_path, "JSON array of site weights")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted Voronoi partitions of a density with prescribed region masses", "avt"};
  app.require_subcommand(1);
  Options opt;

  auto* solve = app.add_subcommand("solve", "fit weights so every region receives its demand");
  add_problem_flags(*solve, opt);
  solve->add_option("--phi-tol", opt.phi_tol, "stop once the sum of squared excesses is below this");
  solve->add_option("--max-iters", opt.max_iters, "outer iteration budget");
  solve->add_option("--seed", opt.seed, "start from seeded random weights instead of zeros");
  solve->add_flag("--trace", opt.trace, "also write trace.json with per-step diagnostics");

  auto* assign_cmd = app.add_subcommand("assign", "assign atoms for given weights");
  add_problem_flags(*assign_cmd, opt);
  add_weights_flag(*assign_cmd, opt);

  auto* cost = app.add_subcommand("cost", "transport cost of the diagram for given weights");
  add_problem_flags(*cost, opt);
  add_weights_flag(*cost, opt);

  auto* verify = app.add_subcommand("verify", "certify given weights against the exact transport LP");
  add_problem_flags(*verify, opt);
  add_weights_flag(*verify, opt);

  auto* render = app.add_subcommand("render", "draw the diagram as a PPM image");
  add_problem_flags(*render, opt);
  add_weights_flag(*render, opt);

  auto* probe = app.add_subcommand("probe", "check sublevel-mass monotonicity for every site pair");
  add_problem_flags(*probe, opt);
  probe->add_option("--steps", opt.probe_steps, "number of sweep levels")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*solve) return cmd_solve(opt, out);
    if (*assign_cmd) return cmd_assign(opt, out);
    if (*cost) return cmd_cost(opt, out);
    if (*verify) return cmd_verify(opt, out);
    if (*render) return cmd_render(opt, out);
    if (*probe) return cmd_probe(opt, out);
  } catch (const Error& e) {
    err << "avt: " << e.what() << '\n';
    return e.code() == ErrorCode::kNotConverged ? kNotSatisfied : kValidationFailure;
  } catch (const std::exception& e) {
    err << "avt: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace avt::cli
