#include "kgk/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kgk {

Grid Grid::make(const KerrParams& p, int nr, int ntheta, double eps_h, double r_max) {
  if (nr < 3 || ntheta < 3) throw DomainError("grid: nr and ntheta must be >= 3");
  if (!(eps_h > 0.0)) throw DomainError("grid: eps_h must be > 0");
  Grid g;
  g.r_min = p.r_plus() + eps_h * p.M();
  g.r_max = r_max * p.M();
  g.nr = nr;
  g.ntheta = ntheta;
  if (!(g.r_max > g.r_min)) throw DomainError("grid: r_max must exceed r_plus + eps_h");
  return g;
}

double Grid::dtheta() const { return std::numbers::pi / ntheta; }

Eigen::MatrixXd DiscretizedSystem::a_h() const {
  return weight.cwiseInverse().asDiagonal() * stiffness;
}

Eigen::MatrixXd DiscretizedSystem::symmetric_a() const {
  const Eigen::VectorXd inv_sqrt = weight.cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * stiffness * inv_sqrt.asDiagonal();
}

namespace {

void check_grid(const KerrParams& p, const Grid& g) {
  if (g.nr < 3 || g.ntheta < 3) throw DomainError("grid: nr and ntheta must be >= 3");
  const double delta_min = (g.r_min - p.r_plus()) * (g.r_min - p.r_minus());
  if (!(g.r_min > p.r_plus()) || !(delta_min > 0.0)) {
    throw DomainError("grid: r_min = " + std::to_string(g.r_min) +
                      " is not outside the horizon r_plus = " + std::to_string(p.r_plus()));
  }
  if (!(g.r_max > g.r_min)) throw DomainError("grid: r_max must exceed r_min");
}

// Everything a row of K needs, precomputed once per grid.
struct Stencil {
  std::vector<double> delta_half;  // Delta at r_min + (i + 1/2) dr, i = 0..nr
  std::vector<double> sin_half;    // sin at j dtheta, j = 0..ntheta, zero at both poles
  std::vector<double> sin_node;
  double dr, dtheta;
};

Stencil make_stencil(const KerrParams& p, const Grid& g) {
  Stencil st;
  st.dr = g.dr();
  st.dtheta = g.dtheta();
  st.delta_half.resize(static_cast<std::size_t>(g.nr + 1));
  for (int i = 0; i <= g.nr; ++i) {
    const double r = g.r_min + (i + 0.5) * st.dr;
    st.delta_half[static_cast<std::size_t>(i)] = (r - p.r_plus()) * (r - p.r_minus());
  }
  st.sin_half.resize(static_cast<std::size_t>(g.ntheta + 1));
  for (int j = 0; j <= g.ntheta; ++j) {
    st.sin_half[static_cast<std::size_t>(j)] =
        (j == 0 || j == g.ntheta) ? 0.0 : std::sin(j * st.dtheta);
  }
  st.sin_node.resize(static_cast<std::size_t>(g.ntheta));
  for (int j = 0; j < g.ntheta; ++j) st.sin_node[static_cast<std::size_t>(j)] = std::sin(g.theta(j));
  return st;
}

// Coupling across the radial face between rows i-1 and i (face index i).
double radial_face(const Stencil& st, int face, int j) {
  return st.sin_node[static_cast<std::size_t>(j)] * st.delta_half[static_cast<std::size_t>(face)] *
         st.dtheta / st.dr;
}

// Coupling across the angular face between columns j-1 and j (face index j).
double angular_face(const Stencil& st, int face) {
  return st.sin_half[static_cast<std::size_t>(face)] * st.dr / st.dtheta;
}

void assemble_row(const KerrParams& p, const ModeSpec& mode, const Grid& g, const Stencil& st,
                  int k, DiscretizedSystem& sys) {
  const int i = k / g.ntheta;
  const int j = k % g.ntheta;
  const Point q{g.r(i), g.theta(j)};
  const Scalars sc = scalars(p, q);
  const double sin_t = st.sin_node[static_cast<std::size_t>(j)];
  const double m2 = static_cast<double>(mode.m) * mode.m;

  const double potential = -m2 * p.a() * p.a() / sc.delta + m2 / (sin_t * sin_t) +
                           mode.mu * mode.mu * sc.sigma;

  const double west = radial_face(st, i, j);
  const double east = radial_face(st, i + 1, j);
  const double south = angular_face(st, j);
  const double north = angular_face(st, j + 1);

  auto row = sys.stiffness.row(k);
  row(k) = west + east + south + north + sin_t * potential * st.dr * st.dtheta;
  if (i > 0) row(g.index(i - 1, j)) = -west;
  if (i + 1 < g.nr) row(g.index(i + 1, j)) = -east;
  if (j > 0) row(g.index(i, j - 1)) = -south;
  if (j + 1 < g.ntheta) row(g.index(i, j + 1)) = -north;

  sys.weight(k) = sc.sigma_bar_1 * sin_t * st.dr * st.dtheta;
  sys.b(k) = b_coefficient(p, mode.m, q);

  if (!std::isfinite(row(k)) || !std::isfinite(sys.weight(k)) || !std::isfinite(sys.b(k))) {
    throw std::runtime_error("assemble: nonfinite coefficient at node (" + std::to_string(i) +
                             ", " + std::to_string(j) + ")");
  }
}

DiscretizedSystem empty_system(const KerrParams& p, const ModeSpec& mode, const Grid& g) {
  const int n = g.size();
  return DiscretizedSystem{p, mode, g, Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                           Eigen::VectorXd::Zero(n)};
}

}  // namespace

DiscretizedSystem assemble(const KerrParams& p, const ModeSpec& mode, const Grid& g) {
  check_grid(p, g);
  const Stencil st = make_stencil(p, g);
  DiscretizedSystem sys = empty_system(p, mode, g);
  const int n = g.size();
  // Rows are independent; an exception inside the parallel region is
  // recorded and rethrown afterwards.
  std::string failure;
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    try {
      assemble_row(p, mode, g, st, k, sys);
    } catch (const std::exception& e) {
#pragma omp critical(kgk_assemble_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw std::runtime_error(failure);
  return sys;
}

DiscretizedSystem assemble_serial(const KerrParams& p, const ModeSpec& mode, const Grid& g) {
  check_grid(p, g);
  const Stencil st = make_stencil(p, g);
  DiscretizedSystem sys = empty_system(p, mode, g);
  for (int k = 0; k < g.size(); ++k) assemble_row(p, mode, g, st, k, sys);
  return sys;
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver failed (n = " + std::to_string(m.rows()) +
                             ", info = " + std::to_string(static_cast<int>(solver.info())) + ")");
  }
  return solver.eigenvalues().minCoeff();
}

double min_eigenvalue_shifted(const DiscretizedSystem& sys, double s) {
  // W^{-1/2}(K + s W B - s^2 W)W^{-1/2} = W^{-1/2} K W^{-1/2} + diag(s b - s^2).
  Eigen::MatrixXd m = sys.symmetric_a();
  m.diagonal().array() += s * sys.b.array() - s * s;
  return min_symmetric_eigenvalue(m);
}

double min_eigenvalue_quarter_b2(const DiscretizedSystem& sys) {
  Eigen::MatrixXd m = sys.symmetric_a();
  m.diagonal().array() += 0.25 * sys.b.array().square();
  return min_symmetric_eigenvalue(m);
}

double operator_scale(const DiscretizedSystem& sys) {
  const Eigen::VectorXd inv_sqrt = sys.weight.cwiseSqrt().cwiseInverse();
  double scale = 0.0;
  for (Eigen::Index k = 0; k < sys.stiffness.rows(); ++k) {
    const double row =
        (sys.stiffness.row(k).cwiseAbs().transpose().cwiseProduct(inv_sqrt)).sum() * inv_sqrt(k);
    scale = std::max(scale, row);
  }
  return scale;
}

PositivityReport verify_mass_bound(const KerrParams& p, int m, const Grid& g) {
  const MuBounds bounds = mu_bounds(p, m);
  const ModeSpec mode = ModeSpec::make(m, bounds.mu_new);
  const double s = m * special_s(p);
  const DiscretizedSystem sys = assemble(p, mode, g);

  PositivityReport rep;
  rep.s_used = s;
  rep.mu_used = bounds.mu_new;
  rep.min_eigenvalue = min_eigenvalue_shifted(sys, s);
  rep.tol_pos = kTolPosRelative * operator_scale(sys);
  rep.passed = rep.min_eigenvalue >= -rep.tol_pos;
  rep.m = m;
  rep.a = p.a();
  rep.grid = g;
  return rep;
}

namespace {

PositivityReport run_case(const MassBoundCase& c, int nr, int ntheta) {
  const KerrParams p = KerrParams::make(c.M, c.a);
  return verify_mass_bound(p, c.m, Grid::make(p, nr, ntheta));
}

}  // namespace

std::vector<PositivityReport> scan_mass_bounds(std::span<const MassBoundCase> cases, int nr,
                                               int ntheta) {
  std::vector<PositivityReport> out(cases.size());
  std::vector<std::string> errors(cases.size());
  const auto count = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      out[idx] = run_case(cases[idx], nr, ntheta);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return out;
}

std::vector<PositivityReport> scan_mass_bounds_serial(std::span<const MassBoundCase> cases,
                                                      int nr, int ntheta) {
  std::vector<PositivityReport> out;
  out.reserve(cases.size());
  for (const MassBoundCase& c : cases) out.push_back(run_case(c, nr, ntheta));
  return out;
}

RadialProfile bump_profile(double lo, double hi, int samples) {
  if (samples < 3 || !(hi > lo)) throw std::invalid_argument("bump_profile: bad arguments");
  RadialProfile f;
  f.r0 = lo;
  f.dr = (hi - lo) / (samples - 1);
  f.values.resize(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double r = lo + k * f.dr;
    const double w = (r - lo) * (hi - r);
    f.values[static_cast<std::size_t>(k)] =
        (k == 0 || k == samples - 1 || w <= 0.0) ? 0.0 : std::exp(-1.0 / w);
  }
  return f;
}

namespace {

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.x[static_cast<std::size_t>(k)] = x;
    rule.w[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

double legendre_quadratic_form(const KerrParams& p, const ModeSpec& mode, double s,
                               const RadialProfile& f, int l) {
  const int am = std::abs(mode.m);
  if (l < am) throw std::invalid_argument("legendre_quadratic_form: l must be >= |m|");
  if (f.values.size() < 3 || !(f.dr > 0.0)) {
    throw std::invalid_argument("legendre_quadratic_form: radial profile needs >= 3 samples");
  }
  if (f.values.front() != 0.0 || f.values.back() != 0.0) {
    throw std::invalid_argument("legendre_quadratic_form: profile must vanish at both ends");
  }
  if (!(f.r0 > p.r_plus())) {
    throw DomainError("legendre_quadratic_form: profile support must lie outside the horizon");
  }

  const double M = p.M();
  const double a = p.a();
  const double m = mode.m;
  const double mu2 = mode.mu * mode.mu;
  const double ll = static_cast<double>(l) * (l + 1);
  const GaussRule rule = gauss_legendre(l + 8);

  // Angular moments: int P^2 dx and int x^2 P^2 dx.
  double p2 = 0.0, x2p2 = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    const double val = std::assoc_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am),
                                           rule.x[q]);
    p2 += rule.w[q] * val * val;
    x2p2 += rule.w[q] * rule.x[q] * rule.x[q] * val * val;
  }

  const std::size_t count = f.values.size();
  auto delta_at = [&](double r) { return (r - p.r_plus()) * (r - p.r_minus()); };
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double r = f.r0 + static_cast<double>(k) * f.dr;
    const double fk = f.values[k];
    if (fk == 0.0 && f.values[k - 1] == 0.0 && f.values[k + 1] == 0.0) continue;
    const double flux_out = delta_at(r + 0.5 * f.dr) * (f.values[k + 1] - fk);
    const double flux_in = delta_at(r - 0.5 * f.dr) * (fk - f.values[k - 1]);
    const double radial = -fk * (flux_out - flux_in) / (f.dr * f.dr);

    const double delta = delta_at(r);
    const double vs_radial = -std::pow(2.0 * s * M * r - m * a, 2) / delta +
                             (mu2 - s * s) * r * r - 2.0 * s * s * M * r;
    const double vs_angular = (mu2 - s * s) * a * a;  // multiplies x^2

    total += (radial * p2 + fk * fk * ((ll + vs_radial) * p2 + vs_angular * x2p2)) * f.dr;
  }
  return total;
}

}  // namespace kgk
