#include "kgk/config.hpp"

#include "kgk/pencil.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace kgk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"subcommand", "out", "seed", "threads"}},
      {"kerr", {"M", "a"}},
      {"mode", {"m", "mu"}},
      {"grid", {"nr", "ntheta", "eps_h", "r_max"}},
      {"evolution",
       {"system", "dt", "T", "record_every", "s_list", "u0", "du0", "initial",
        "window_fraction", "reference"}},
      {"pencil", {"example", "a_file", "b_file", "s_grid"}},
      {"geometry_map", {"nr", "ntheta", "r_max", "s"}},
  };
  return keys;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || errno == ERANGE || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || errno == ERANGE || end != v.c_str() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + key + "': integer out of range");
  }
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::string norm = v;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream is(norm);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& tok : split_list(v)) out.push_back(to_double(key, tok));
  return out;
}

}  // namespace

std::vector<double> parse_grid_spec(const std::string& text) {
  const std::string v = trim(text);
  if (std::count(v.begin(), v.end(), ':') == 2) {
    const auto c1 = v.find(':');
    const auto c2 = v.find(':', c1 + 1);
    const double lo = to_double("s_grid", trim(v.substr(0, c1)));
    const double hi = to_double("s_grid", trim(v.substr(c1 + 1, c2 - c1 - 1)));
    const int count = to_int("s_grid", trim(v.substr(c2 + 1)));
    if (count < 1) throw ConfigError("s_grid: count must be >= 1");
    return linspace(lo, hi, count);
  }
  std::vector<double> out = to_doubles("s_grid", v);
  if (out.empty()) throw ConfigError("s_grid: empty");
  return out;
}

void RunConfig::validate() const {
  static const std::set<std::string> subcommands = {"geometry-map", "pencil", "evolve",
                                                    "stability", "demo-examples"};
  if (!subcommand.empty() && !subcommands.count(subcommand)) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  if (!(M > 0.0)) throw ConfigError("[kerr] M must be > 0");
  if (!(a >= 0.0 && a <= M)) throw ConfigError("[kerr] a must satisfy 0 <= a <= M");
  if (!(mu >= 0.0)) throw ConfigError("[mode] mu must be >= 0");
  if (grid_nr < 3 || grid_ntheta < 3) throw ConfigError("[grid] nr, ntheta must be >= 3");
  if (!(eps_h > 0.0)) throw ConfigError("[grid] eps_h must be > 0");
  // r_max (units of M) must clear r_plus + eps_h for every admissible spin.
  if (!(r_max > 2.0 + eps_h)) throw ConfigError("[grid] r_max must exceed 2 + eps_h (units of M)");
  if (!(dt > 0.0) || !(T > 0.0) || dt > T) throw ConfigError("[evolution] need dt > 0, T > 0, dt <= T");
  if (record_every < 1) throw ConfigError("[evolution] record_every must be >= 1");
  static const std::set<std::string> systems = {"example_stable", "example_unstable",
                                                "discretized", "matrices"};
  if (!systems.count(system)) throw ConfigError("[evolution] unknown system '" + system + "'");
  if (initial != "given" && initial != "random") {
    throw ConfigError("[evolution] initial must be 'given' or 'random'");
  }
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw ConfigError("[evolution] window_fraction must be in (0, 1]");
  }
  if (!pencil_example.empty() && pencil_example != "stable" && pencil_example != "unstable") {
    throw ConfigError("[pencil] example must be 'stable' or 'unstable'");
  }
  if (map_nr < 1 || map_ntheta < 1) throw ConfigError("[geometry_map] nr, ntheta must be >= 1");
  if (threads < 0) throw ConfigError("[run] threads must be >= 0");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + "key '" + key + "' outside any section");
    if (!schema().at(section).count(key)) {
      throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw ConfigError(where + "duplicate key '" + full + "'");

    try {
      if (section == "run") {
        if (key == "subcommand") cfg.subcommand = value;
        else if (key == "out") cfg.out = value;
        else if (key == "seed") {
          const long long s = to_integer(full, value);
          if (s < 0) throw ConfigError("key 'run.seed' must be >= 0");
          cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "threads") cfg.threads = to_int(full, value);
      } else if (section == "kerr") {
        if (key == "M") cfg.M = to_double(full, value);
        else cfg.a = to_double(full, value);
      } else if (section == "mode") {
        if (key == "m") cfg.m = to_int(full, value);
        else if (value == "mu_new") cfg.mu_is_bound = true;
        else cfg.mu = to_double(full, value);
      } else if (section == "grid") {
        if (key == "nr") cfg.grid_nr = to_int(full, value);
        else if (key == "ntheta") cfg.grid_ntheta = to_int(full, value);
        else if (key == "eps_h") cfg.eps_h = to_double(full, value);
        else cfg.r_max = to_double(full, value);
      } else if (section == "evolution") {
        if (key == "system") cfg.system = value;
        else if (key == "dt") cfg.dt = to_double(full, value);
        else if (key == "T") cfg.T = to_double(full, value);
        else if (key == "record_every") cfg.record_every = to_int(full, value);
        else if (key == "s_list") cfg.s_list = to_doubles(full, value);
        else if (key == "u0") cfg.u0 = split_list(value);
        else if (key == "du0") cfg.du0 = split_list(value);
        else if (key == "initial") cfg.initial = value;
        else if (key == "window_fraction") cfg.window_fraction = to_double(full, value);
        else cfg.reference = to_bool(full, value);
      } else if (section == "pencil") {
        if (key == "example") cfg.pencil_example = value;
        else if (key == "a_file") cfg.a_file = value;
        else if (key == "b_file") cfg.b_file = value;
        else cfg.s_grid = parse_grid_spec(value);
      } else if (section == "geometry_map") {
        if (key == "nr") cfg.map_nr = to_int(full, value);
        else if (key == "ntheta") cfg.map_ntheta = to_int(full, value);
        else if (key == "r_max") cfg.map_r_max = to_double(full, value);
        else if (value != "special") cfg.map_s = to_double(full, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace kgk
