#pragma once

// Flat "key = value" run configuration with one [section] per module.
//
//   [run]           subcommand, out, seed, threads
//   [kerr]          M, a
//   [mode]          m, mu            (mu may be "mu_new")
//   [grid]          nr, ntheta, eps_h, r_max
//   [evolution]     system, dt, T, record_every, s_list, u0, du0, initial,
//                   window_fraction, reference
//   [pencil]        example, a_file, b_file, s_grid
//   [geometry_map]  nr, ntheta, r_max, s
//
// Lists are comma or whitespace separated; s_grid also accepts lo:hi:count.
// Unknown sections and keys are errors.

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = OpenMP default

  double M = 1.0;
  double a = 0.5;

  int m = 1;
  double mu = 0.0;
  bool mu_is_bound = false;  // mu = mu_new(m)

  int grid_nr = 60;
  int grid_ntheta = 30;
  double eps_h = 1e-3;
  double r_max = 20.0;

  std::string system = "example_stable";  // example_stable | example_unstable | discretized | matrices
  double dt = 1e-3;
  double T = 10.0;
  int record_every = 10;
  std::vector<double> s_list;
  std::vector<std::string> u0;   // complex entries
  std::vector<std::string> du0;
  std::string initial = "given";  // given | random
  double window_fraction = 0.5;
  bool reference = false;         // also evolve a seeded second solution and record j

  std::string pencil_example;     // stable | unstable
  std::string a_file;
  std::string b_file;
  std::vector<double> s_grid;

  int map_nr = 40;
  int map_ntheta = 20;
  double map_r_max = 6.0;
  std::optional<double> map_s;    // default: special_s

  /// Re-validates module invariants (spin range, grid sizes, dt, ...).
  void validate() const;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// "lo:hi:count" or a list of numbers.
std::vector<double> parse_grid_spec(const std::string& text);

}  // namespace kgk
