#pragma once

// Flux-form finite differences for the reduced Klein-Gordon operator on a
// truncated (r, theta) slab, and the discrete positivity checks built on it.
//
// Unknowns live at interior nodes r_i = r_min + (i+1) dr, i < nr, and at
// cell centres theta_j = (j + 1/2) dtheta, j < ntheta. Values vanish at
// r_min and r_max (Dirichlet); the theta fluxes carry sin(theta) at half
// nodes, which is zero at both poles. The node index is k = i * ntheta + j.
//
// The discrete operator is A_h = W^{-1} K with K symmetric and
// W = diag(Sigma_bar sin(theta) dr dtheta), the quadrature weight of the
// space L^2(Sigma_bar sin(theta)). Spectra are computed from the symmetric
// similarity transform W^{-1/2} K W^{-1/2}.

#include "kgk/geometry.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace kgk {

struct Grid {
  double r_min = 0.0;  // Dirichlet boundary, r_plus + eps_h
  double r_max = 0.0;  // Dirichlet boundary
  int nr = 0;
  int ntheta = 0;

  /// eps_h and r_max in units of M; defaults eps_h = 1e-3, r_max = 20.
  static Grid make(const KerrParams& p, int nr, int ntheta, double eps_h = 1e-3,
                   double r_max = 20.0);

  double dr() const { return (r_max - r_min) / (nr + 1); }
  double dtheta() const;
  double r(int i) const { return r_min + (i + 1) * dr(); }
  double theta(int j) const { return (j + 0.5) * dtheta(); }
  int size() const { return nr * ntheta; }
  int index(int i, int j) const { return i * ntheta + j; }
};

struct DiscretizedSystem {
  KerrParams params;
  ModeSpec mode;
  Grid grid;
  Eigen::MatrixXd stiffness;  // K, symmetric
  Eigen::VectorXd weight;     // W, positive
  Eigen::VectorXd b;          // diagonal of B_h

  int n() const { return grid.size(); }
  /// A_h = W^{-1} K.
  Eigen::MatrixXd a_h() const;
  /// W^{-1/2} K W^{-1/2}, similar to A_h and symmetric.
  Eigen::MatrixXd symmetric_a() const;
};

DiscretizedSystem assemble(const KerrParams& p, const ModeSpec& mode, const Grid& g);
DiscretizedSystem assemble_serial(const KerrParams& p, const ModeSpec& mode, const Grid& g);

/// Smallest eigenvalue of the dense symmetric matrix.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of A_h + s B_h - s^2 in the W-weighted product.
double min_eigenvalue_shifted(const DiscretizedSystem& sys, double s);

/// Smallest eigenvalue of A_h + B_h^2 / 4.
double min_eigenvalue_quarter_b2(const DiscretizedSystem& sys);

/// Max-row-sum norm of W^{-1/2} K W^{-1/2}.
double operator_scale(const DiscretizedSystem& sys);

/// Relative tolerance applied to the scale above for positivity checks.
inline constexpr double kTolPosRelative = 1e-8;

struct PositivityReport {
  double s_used = 0.0;
  double mu_used = 0.0;
  double min_eigenvalue = 0.0;
  double tol_pos = 0.0;
  bool passed = false;
  int m = 0;
  double a = 0.0;
  Grid grid;
};

/// Assembles at mu = mu_new(m) and checks A_h + sB_h - s^2 >= -tol_pos at
/// s = m a / (2 M r_plus).
PositivityReport verify_mass_bound(const KerrParams& p, int m, const Grid& g);

struct MassBoundCase {
  double M = 1.0;
  double a = 0.0;
  int m = 0;
};

/// verify_mass_bound over a list of cases; results in input order. The
/// OpenMP version runs one case per thread.
std::vector<PositivityReport> scan_mass_bounds(std::span<const MassBoundCase> cases, int nr,
                                               int ntheta);
std::vector<PositivityReport> scan_mass_bounds_serial(std::span<const MassBoundCase> cases,
                                                      int nr, int ntheta);

/// Samples of a radial profile on r_k = r0 + k dr. The first and last
/// samples must be zero (compact support inside the sampled interval).
struct RadialProfile {
  double r0 = 0.0;
  double dr = 0.0;
  std::vector<double> values;
};

/// C-infinity bump exp(-1 / ((r - lo)(hi - r))) sampled with `samples` points
/// on [lo, hi].
RadialProfile bump_profile(double lo, double hi, int samples);

/// <F | (A0 + sB - s^2) F> in L^2(Sigma_bar sin(theta)) for
/// F = f(r) P^m_l(cos(theta)). The theta integral uses Gauss-Legendre in
/// cos(theta) with the Legendre equation applied analytically; the radial
/// part uses flux differences of the samples.
double legendre_quadratic_form(const KerrParams& p, const ModeSpec& mode, double s,
                               const RadialProfile& f, int l);

}  // namespace kgk
