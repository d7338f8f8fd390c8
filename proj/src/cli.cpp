#include "kgk/cli.hpp"

#include "kgk/config.hpp"
#include "kgk/discretization.hpp"
#include "kgk/evolution.hpp"
#include "kgk/geometry.hpp"
#include "kgk/matrix_io.hpp"
#include "kgk/pencil.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>

namespace kgk {

namespace {

using json = nlohmann::ordered_json;

struct Check {
  std::string name;
  std::string criterion;
  double value;
  double tolerance;
  std::string relation;  // how value is compared with tolerance
  bool passed;
};

class Report {
 public:
  explicit Report(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  json& inputs() { return inputs_; }
  json& results() { return results_; }

  void check(std::string name, std::string criterion, double value, double tolerance,
             std::string relation, bool passed) {
    checks_.push_back({std::move(name), std::move(criterion), value, tolerance,
                       std::move(relation), passed});
  }
  void timing(const std::string& name, double seconds) { timings_[name] = seconds; }

  bool passed() const {
    for (const Check& c : checks_) {
      if (!c.passed) return false;
    }
    return true;
  }
  const std::vector<Check>& checks() const { return checks_; }

  json to_json() const {
    json j;
    j["subcommand"] = subcommand_;
    j["inputs"] = inputs_;
    j["results"] = results_;
    json checks = json::array();
    for (const Check& c : checks_) {
      checks.push_back({{"name", c.name},
                        {"criterion", c.criterion},
                        {"value", c.value},
                        {"tolerance", c.tolerance},
                        {"relation", c.relation},
                        {"passed", c.passed}});
    }
    j["checks"] = checks;
    j["passed"] = passed();
    j["timings_s"] = timings_;
    return j;
  }

  void explain_failures(std::ostream& err) const {
    for (const Check& c : checks_) {
      if (c.passed) continue;
      err << "check failed: " << c.name << " [" << c.criterion << "]: value "
          << format_double(c.value) << " not " << c.relation << ' ' << format_double(c.tolerance)
          << '\n';
    }
  }

 private:
  std::string subcommand_;
  json inputs_ = json::object();
  json results_ = json::object();
  std::vector<Check> checks_;
  json timings_ = json::object();
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    os_ = &file_;
  }
  std::ostream& get() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

QuadraticState random_state(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  QuadraticState st;
  st.u.resize(n);
  st.du.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = 2.0 * unit_uniform(gen) - 1.0;
    st.u(k) = cplx{re, 2.0 * unit_uniform(gen) - 1.0};
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = 2.0 * unit_uniform(gen) - 1.0;
    st.du(k) = cplx{re, 2.0 * unit_uniform(gen) - 1.0};
  }
  return st;
}

Eigen::VectorXcd parse_vector(const std::vector<std::string>& tokens, Eigen::Index n,
                              const std::string& key) {
  if (static_cast<Eigen::Index>(tokens.size()) != n) {
    throw ConfigError("[evolution] " + key + " has " + std::to_string(tokens.size()) +
                      " entries, system dimension is " + std::to_string(n));
  }
  Eigen::VectorXcd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = parse_complex(tokens[static_cast<std::size_t>(k)]);
  return v;
}

KerrParams kerr_of(const RunConfig& cfg) { return KerrParams::make(cfg.M, cfg.a); }

double mu_of(const RunConfig& cfg, const KerrParams& p) {
  return cfg.mu_is_bound ? mu_bounds(p, cfg.m).mu_new : cfg.mu;
}

Grid grid_of(const RunConfig& cfg, const KerrParams& p) {
  return Grid::make(p, cfg.grid_nr, cfg.grid_ntheta, cfg.eps_h, cfg.r_max);
}

void echo_common(json& in, const RunConfig& cfg) {
  in["M"] = cfg.M;
  in["a"] = cfg.a;
  in["m"] = cfg.m;
  if (cfg.mu_is_bound) {
    in["mu"] = "mu_new";
  } else {
    in["mu"] = cfg.mu;
  }
}

json grid_json(const Grid& g) {
  return {{"r_min", g.r_min}, {"r_max", g.r_max}, {"nr", g.nr}, {"ntheta", g.ntheta}};
}

PencilPair pencil_from_files(const RunConfig& cfg) {
  if (cfg.b_file.empty()) throw ConfigError("[pencil] a_file given without b_file");
  return {HermitianOperator::make(read_matrix_file(cfg.a_file)),
          HermitianOperator::make(read_matrix_file(cfg.b_file))};
}

// ---------------------------------------------------------------------------

int cmd_geometry_map(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const KerrParams p = kerr_of(cfg);
  const double s = cfg.map_s.value_or(special_s(p));
  const Lattice lat{p.r_plus() + cfg.eps_h * p.M(), cfg.map_r_max * p.M(), cfg.map_nr,
                    cfg.map_ntheta};
  const std::vector<GeometryMapRow> rows = geometry_map(p, s, lat);

  Sink sink(cfg.out, out);
  std::ostream& os = sink.get();
  os << "r,theta,g_tt,killing_norm,in_ergoregion,in_omega_e2\n";
  for (const GeometryMapRow& row : rows) {
    os << format_double(row.r) << ',' << format_double(row.theta) << ','
       << format_double(row.g_tt) << ',' << format_double(row.killing_norm) << ','
       << (row.in_ergoregion ? "true" : "false") << ',' << (row.in_omega_e2 ? "true" : "false")
       << '\n';
  }

  // For a/M <= sqrt(3)/3 every ergoregion point lies in Omega_e2.
  if (cfg.a > 0.0 && cfg.a <= cfg.M * std::sqrt(3.0) / 3.0) {
    std::size_t outside = 0;
    for (const GeometryMapRow& row : rows) {
      if (row.in_ergoregion && !row.in_omega_e2) ++outside;
    }
    if (outside > 0) {
      err << "check failed: ergoregion_inclusion [ergoregion points lie in Omega_e2 for a/M <= "
             "sqrt(3)/3]: "
          << outside << " lattice points outside\n";
      return kExitCheckFailed;
    }
  }
  return kExitOk;
}

int cmd_pencil(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  Report report("pencil");
  std::optional<PencilPair> pair;
  if (!cfg.a_file.empty()) {
    pair = pencil_from_files(cfg);
    report.inputs()["a_file"] = cfg.a_file;
    report.inputs()["b_file"] = cfg.b_file;
  } else if (cfg.pencil_example == "unstable") {
    pair = example_unstable();
    report.inputs()["example"] = "unstable";
  } else if (cfg.pencil_example == "stable") {
    pair = example_stable();
    report.inputs()["example"] = "stable";
  } else {
    throw ConfigError("pencil: set [pencil] example or a_file/b_file");
  }

  Stopwatch sw;
  const PencilSpectrum spec = pencil_eigenvalues(pair->a_tilde, pair->b);
  report.timing("pencil_eigenvalues", sw.seconds());

  json& res = report.results();
  res["n"] = pair->a_tilde.dim();
  json eig = json::array();
  for (cplx z : spec.eigenvalues) eig.push_back(complex_json(z));
  res["eigenvalues"] = eig;
  res["classification"] = to_string(spec.classification);
  res["growth_rate"] = spec.growth_rate;
  res["max_abs_imag"] = spec.max_abs_imag;
  res["tol_imag"] = spec.tol_imag;
  if (pair->a_tilde.dim() <= 10) {
    json coeffs = json::array();
    for (cplx c : char_poly_coefficients(pair->a_tilde, pair->b)) coeffs.push_back(complex_json(c));
    res["char_poly_coefficients"] = coeffs;
  }
  if (!cfg.s_grid.empty()) {
    Stopwatch sws;
    const StabilitySearch search = stability_search(pair->a_tilde, pair->b, cfg.s_grid);
    report.timing("stability_search", sws.seconds());
    res["stability_search"] = {{"s_grid", cfg.s_grid},
                               {"min_eigs", search.min_eigs},
                               {"best_s", search.best_s},
                               {"min_eig_at_best", search.min_eig_at_best},
                               {"certificate", search.certificate},
                               {"certificate_threshold", 0.0}};
  }

  Sink sink(cfg.out, out);
  sink.get() << report.to_json().dump(2) << '\n';
  return kExitOk;
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LinearSystem sys;
  if (cfg.system == "example_stable" || cfg.system == "example_unstable") {
    const PencilPair pair = cfg.system == "example_stable" ? example_stable() : example_unstable();
    sys = LinearSystem::euclidean(pair.a_tilde, pair.b);
  } else if (cfg.system == "matrices") {
    if (cfg.a_file.empty()) throw ConfigError("evolve: system = matrices needs [pencil] a_file, b_file");
    const PencilPair pair = pencil_from_files(cfg);
    sys = LinearSystem::euclidean(pair.a_tilde, pair.b);
  } else {
    const KerrParams p = kerr_of(cfg);
    const ModeSpec mode = ModeSpec::make(cfg.m, mu_of(cfg, p));
    sys = LinearSystem::from_discretized(assemble(p, mode, grid_of(cfg, p)));
  }
  const Eigen::Index n = sys.n();

  QuadraticState init;
  if (cfg.initial == "random") {
    init = random_state(n, cfg.seed);
  } else {
    if (cfg.u0.empty()) {
      if (n != 2) throw ConfigError("evolve: [evolution] u0 is required for this system");
      init.u = Eigen::Vector2cd(0.0, 1.0);
    } else {
      init.u = parse_vector(cfg.u0, n, "u0");
    }
    init.du = cfg.du0.empty() ? Eigen::VectorXcd::Zero(n) : parse_vector(cfg.du0, n, "du0");
  }
  std::optional<QuadraticState> reference;
  if (cfg.reference) reference = random_state(n, cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  EvolutionConfig ec;
  ec.dt = cfg.dt;
  ec.T = cfg.T;
  ec.record_every = cfg.record_every;
  ec.s_list = cfg.s_list;
  ec.keep_states = false;
  const Trajectory traj = evolve(sys, init, ec, reference);

  Sink sink(cfg.out, out);
  write_trajectory_csv(sink.get(), traj);
  if (traj.aborted) {
    err << "check failed: finite_state [evolution stays finite]: aborted at t = "
        << format_double(traj.times.back()) << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_stability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Report report("stability");
  const KerrParams p = kerr_of(cfg);
  const Grid g = grid_of(cfg, p);
  echo_common(report.inputs(), cfg);
  report.inputs()["grid"] = grid_json(g);

  const MuBounds mb = mu_bounds(p, cfg.m);
  const double s_special = cfg.m * special_s(p);
  json& res = report.results();
  res["mu_old"] = mb.mu_old;
  res["mu_new"] = mb.mu_new;
  res["alpha"] = mb.alpha;
  res["special_s"] = special_s(p);

  Stopwatch sw;
  const PositivityReport pr = verify_mass_bound(p, cfg.m, g);
  report.timing("verify_mass_bound", sw.seconds());
  res["mass_bound"] = {{"s_used", pr.s_used},
                       {"mu_used", pr.mu_used},
                       {"min_eigenvalue", pr.min_eigenvalue},
                       {"tol_pos", pr.tol_pos},
                       {"passed", pr.passed}};
  report.check("mass_bound_positivity",
               "min eig(A_h + s B_h - s^2) >= -tol_pos at mu = mu_new, s = m a / (2 M r_plus)",
               pr.min_eigenvalue, -pr.tol_pos, ">=", pr.passed);
  if (cfg.m != 0 && cfg.a > 0.0) {
    report.check("mu_new_below_mu_old", "mu_old - mu_new > 0 for a > 0, m != 0",
                 mb.mu_old - mb.mu_new, 0.0, ">", mb.mu_old > mb.mu_new);
  }

  const double mu = mu_of(cfg, p);
  const std::vector<double> s_grid =
      !cfg.s_grid.empty() ? cfg.s_grid
      : s_special != 0.0  ? linspace(0.0, 2.0 * s_special, 11)
                          : std::vector<double>{0.0};
  Stopwatch sws;
  const DiscretizedSystem sys = assemble(p, ModeSpec::make(cfg.m, mu), g);
  const HermitianOperator a_op = HermitianOperator::make_real(sys.symmetric_a());
  const HermitianOperator b_op = HermitianOperator::make_real(sys.b.asDiagonal().toDenseMatrix());
  const StabilitySearch search = stability_search(a_op, b_op, s_grid);
  report.timing("stability_search", sws.seconds());
  res["stability_search"] = {{"mu", mu},
                             {"s_grid", s_grid},
                             {"min_eigs", search.min_eigs},
                             {"best_s", search.best_s},
                             {"min_eig_at_best", search.min_eig_at_best},
                             {"certificate", search.certificate},
                             {"certificate_threshold", 0.0}};

  Sink sink(cfg.out, out);
  sink.get() << report.to_json().dump(2) << '\n';
  report.explain_failures(err);
  return report.passed() ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct DemoRow {
  std::string example;
  std::string check;
  std::string value;
  std::string tolerance;
  bool passed;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

bool is_real_root(cplx z, double tol) { return std::abs(z.imag()) <= tol; }

int count_real_in(const PencilSpectrum& spec, double lo, double hi) {
  int n = 0;
  for (cplx z : spec.eigenvalues) {
    if (is_real_root(z, spec.tol_imag) && z.real() > lo && z.real() < hi) ++n;
  }
  return n;
}

double max_coeff_error(const std::vector<cplx>& got, const std::vector<double>& want) {
  if (got.size() != want.size()) return INFINITY;
  double e = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) e = std::max(e, std::abs(got[k] - want[k]));
  return e;
}

Trajectory run_example(const PencilPair& pair, double T) {
  const LinearSystem sys = LinearSystem::euclidean(pair.a_tilde, pair.b);
  QuadraticState init;
  init.u = Eigen::Vector2cd(0.0, 1.0);
  init.du = Eigen::Vector2cd::Zero();
  EvolutionConfig ec;
  ec.dt = 1e-3;
  ec.T = T;
  ec.record_every = 10;
  ec.keep_states = false;
  return evolve(sys, init, ec);
}

int cmd_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<DemoRow> rows;
  auto add = [&rows](std::string ex, std::string check, std::string value, std::string tol,
                     bool ok) {
    rows.push_back({std::move(ex), std::move(check), std::move(value), std::move(tol), ok});
  };

  {
    const PencilPair pair = example_stable();
    const PencilSpectrum spec = pencil_eigenvalues(pair.a_tilde, pair.b);
    const double ce = max_coeff_error(char_poly_coefficients(pair.a_tilde, pair.b),
                                      {1.0, 6.0, 8.0, 0.0, -1.0});
    add("example_stable", "char poly (1, 6, 8, 0, -1)", fmt(ce), "== 0", ce == 0.0);
    bool one_each = true;
    for (auto [lo, hi] : {std::pair{-5.0, -4.0}, {-4.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}}) {
      one_each = one_each && count_real_in(spec, lo, hi) == 1;
    }
    add("example_stable", "4 real roots, one per interval", one_each ? "yes" : "no", "yes",
        one_each);
    add("example_stable", "classification", to_string(spec.classification), "Stable",
        spec.classification == Stability::Stable);

    QuadraticState init;
    init.u = Eigen::Vector2cd(0.0, 1.0);
    init.du = Eigen::Vector2cd::Zero();
    const double e0 = energy(pair.a_tilde, init);
    add("example_stable", "E_u(0) = -1", fmt(e0), "== -1", e0 == -1.0);

    const Trajectory traj = run_example(pair, 200.0);
    const double ratio =
        *std::max_element(traj.norm.begin(), traj.norm.end()) / traj.norm.front();
    add("example_stable", "bounded: max|u|/|u(0)| over T=200", fmt(ratio), "<= 50",
        !traj.aborted && ratio <= 50.0);
    const double rate = growth_rate_estimate(traj, 1.0);
    add("example_stable", "fitted growth rate", fmt(rate), "< 0.001", rate < 1e-3);
  }
  {
    const PencilPair pair = example_unstable();
    const PencilSpectrum spec = pencil_eigenvalues(pair.a_tilde, pair.b);
    const double ce = max_coeff_error(char_poly_coefficients(pair.a_tilde, pair.b),
                                      {1.0, 4.6, 4.29, 0.0, -1.0});
    add("example_unstable", "char poly (1, 4.6, 4.29, 0, -1)", fmt(ce), "<= 1e-12", ce <= 1e-12);
    int real_roots = 0;
    int complex_roots = 0;
    for (cplx z : spec.eigenvalues) {
      if (is_real_root(z, spec.tol_imag)) {
        ++real_roots;
      } else if (std::abs(z.imag()) > 1e-3) {
        ++complex_roots;
      }
    }
    const bool roots_ok = real_roots == 2 && complex_roots == 2 &&
                          count_real_in(spec, -4.0, -3.0) == 1 &&
                          count_real_in(spec, 0.0, 1.0) == 1;
    add("example_unstable", "2 real roots + complex pair", roots_ok ? "yes" : "no", "yes",
        roots_ok);
    add("example_unstable", "classification", to_string(spec.classification), "Unstable",
        spec.classification == Stability::Unstable);
    const Eigen::MatrixXcd core =
        pair.a_tilde.matrix() + 0.25 * pair.b.matrix() * pair.b.matrix();
    const double min_core = min_eigenvalue(HermitianOperator::make(core));
    add("example_unstable", "min eig(A~ + B^2/4)", fmt(min_core), "> 0", min_core > 0.0);

    const Trajectory traj = run_example(pair, 60.0);
    const double rate = growth_rate_estimate(traj, 0.5);
    const double rel = std::abs(rate - spec.growth_rate) / spec.growth_rate;
    add("example_unstable", "fitted vs pencil growth rate",
        fmt(rate) + " vs " + fmt(spec.growth_rate), "rel <= 0.05", !traj.aborted && rel <= 0.05);
  }

  Sink sink(cfg.out, out);
  std::ostream& os = sink.get();
  char line[256];
  std::snprintf(line, sizeof line, "%-17s %-36s %-26s %-12s %s\n", "example", "check", "value",
                "tolerance", "result");
  os << line;
  bool all = true;
  for (const DemoRow& r : rows) {
    std::snprintf(line, sizeof line, "%-17s %-36s %-26s %-12s %s\n", r.example.c_str(),
                  r.check.c_str(), r.value.c_str(), r.tolerance.c_str(),
                  r.passed ? "PASS" : "FAIL");
    os << line;
    if (!r.passed) {
      all = false;
      err << "check failed: " << r.example << ": " << r.check << " (value " << r.value
          << ", required " << r.tolerance << ")\n";
    }
  }
  os << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kerr Klein-Gordon stability toolkit"};
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("subcommand", subcommand,
                 "geometry-map | pencil | evolve | stability | demo-examples");
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_path, "output path (default: stdout)");
  app.add_option("--seed", seed, "seed for random initial data");
  app.add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
    if (!subcommand.empty()) cfg.subcommand = subcommand;
    if (out_path) cfg.out = *out_path;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    if (cfg.subcommand.empty()) throw ConfigError("no subcommand given");
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    if (cfg.subcommand == "geometry-map") return cmd_geometry_map(cfg, out, err);
    if (cfg.subcommand == "pencil") return cmd_pencil(cfg, out, err);
    if (cfg.subcommand == "evolve") return cmd_evolve(cfg, out, err);
    if (cfg.subcommand == "stability") return cmd_stability(cfg, out, err);
    return cmd_demo(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::logic_error& e) {
    // DomainError, DimensionError and invalid_argument: inputs violate a module invariant.
    err << "invalid input: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace kgk
