#pragma once

// Closed-form Boyer-Lindquist scalars for a Kerr background, as they enter
// the azimuthally separated Klein-Gordon operator.
//
// Signature convention is (+,-,-,-): g_tt = 1 - 2Mr/Sigma, g_rr < 0,
// g_phph < 0. Quantities are in geometric units (G = c = 1).

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgk {

/// Raised when a point lies on (or within 1e-10 of) the horizon or a pole,
/// or when parameters violate their invariants.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Black-hole mass and spin, 0 <= a <= M, with cached horizon radii.
class KerrParams {
 public:
  static KerrParams make(double M, double a);

  double M() const { return M_; }
  double a() const { return a_; }
  double r_plus() const { return r_plus_; }
  double r_minus() const { return r_minus_; }

 private:
  KerrParams(double M, double a, double rp, double rm)
      : M_(M), a_(a), r_plus_(rp), r_minus_(rm) {}
  double M_, a_, r_plus_, r_minus_;
};

/// Azimuthal number m and field mass mu >= 0.
struct ModeSpec {
  int m = 0;
  double mu = 0.0;

  static ModeSpec make(int m, double mu);
};

/// A point (r, theta) of the stationary slice (r_plus, inf) x (0, pi).
struct Point {
  double r;
  double theta;
};

/// Distance below which a point counts as sitting on the horizon or a pole.
inline constexpr double kBoundaryMargin = 1e-10;

/// Throws DomainError unless q lies strictly inside the slice for p.
void require_inside(const KerrParams& p, const Point& q);
bool is_inside(const KerrParams& p, const Point& q) noexcept;

struct Scalars {
  double delta;
  double sigma;
  double sigma_bar_1;  // ((r^2+a^2) Sigma + 2 M a^2 r sin^2) / Delta, canonical
  double sigma_bar_2;  // (r^2+a^2)^2 / Delta - a^2 sin^2
  double sigma_bar_3;  // Sigma + 2Mr + 4 M^2 r^2 / Delta
};

Scalars scalars(const KerrParams& p, const Point& q);

struct MetricComponents {
  double g_tt, g_tphi, g_rr, g_thth, g_phph;
  double gi_tt, gi_tphi, gi_rr, gi_thth, gi_phph;
  double rho;  // Delta sin^2(theta) = -(g_tt g_phph - g_tphi^2)
};

MetricComponents metric(const KerrParams& p, const Point& q);

/// b = 4 m M a r / (Delta Sigma_bar), the coefficient of i du/dt.
double b_coefficient(const KerrParams& p, int m, const Point& q);

/// a / (2 M r_plus): the angular velocity of the horizon-generating Killing field.
double special_s(const KerrParams& p);

struct KillingNorm {
  double direct;  // g_tt + 2 s g_tphi + s^2 g_phph
  // Present only for s = special_s(p). `factored` is the full product
  // Delta / (4 M^2 r_+^2 Sigma) * bracket, `bracket` the square-bracket term
  // alone (its sign decides timelikeness; the Delta prefactor vanishes on the
  // horizon).
  std::optional<double> factored;
  std::optional<double> bracket;
};

KillingNorm killing_norm(const KerrParams& p, double s, const Point& q);

struct RegionMembership {
  bool in_ergoregion;  // a^2 sin^2 - Delta > 0
  bool in_omega_e2;    // the Killing field at special_s is timelike
};

RegionMembership region_membership(const KerrParams& p, const Point& q);

struct PotentialVs {
  double form1;  // -m^2a^2/Delta + mu^2 Sigma + s 4mMar/Delta - s^2 Sigma_bar
  double form2;  // vs1 + vs2
  double vs1;    // -(2sMr - ma)^2 / Delta
  double vs2;    // (mu^2 - s^2) Sigma - 2 s^2 M r
};

PotentialVs potential_Vs(const KerrParams& p, const ModeSpec& mode, double s,
                         const Point& q);

/// Absolute difference of two evaluations of one identity, together with the
/// magnitude used to judge it: scale = max(1, |lhs|, |rhs|).
struct Residual {
  double abs;
  double scale;
  double relative() const { return abs / scale; }
};

/// Checks (1/Sb)(-m^2a^2/Delta + m^2/sin^2) + b^2/4 == m^2 Sigma^2/(Delta Sb^2 sin^2).
Residual positivity_identity_residual(const KerrParams& p, int m, const Point& q);

/// Compares the zeroth-order coefficient of A0 + m s B - (m s)^2 with
/// (m^2 g(xi, xi) + mu^2 rho) / (-g_phph), xi = d_t + s d_phi.
Residual connection_identity_residual(const KerrParams& p, const ModeSpec& mode,
                                      double s, const Point& q);

struct MuBounds {
  double mu_old;
  double mu_new;
  double alpha;  // lower bound of the closure of A0
};

MuBounds mu_bounds(const KerrParams& p, int m);

/// Outer radius of the ergoregion at polar angle theta: M + sqrt(M^2 - a^2 cos^2).
double ergosurface_radius(const KerrParams& p, double theta);

// ---------------------------------------------------------------------------
// Batched kernels. Each has an OpenMP version and a serial reference with
// identical per-element arithmetic, so both return bitwise-equal results.

struct GeometryMapRow {
  double r, theta, g_tt, killing_norm;
  bool in_ergoregion, in_omega_e2;
};

/// Uniform lattice over [r_lo, r_hi] x (0, pi), theta at cell centres.
struct Lattice {
  double r_lo, r_hi;
  int nr, ntheta;
};

std::vector<GeometryMapRow> geometry_map(const KerrParams& p, double s,
                                         const Lattice& lattice);
std::vector<GeometryMapRow> geometry_map_serial(const KerrParams& p, double s,
                                                const Lattice& lattice);

/// Worst relative residual of each identity over a point set.
struct IdentitySweep {
  double sigma_bar;     // max over both alternative forms
  double vs_forms;
  double positivity;    // relative to m^2 * scale
  double killing;       // only meaningful when a > 0 and s = special_s
  double connection;
  double min_positivity_lhs;  // smallest value of the left side; >= 0 expected
};

IdentitySweep identity_sweep(const KerrParams& p, const ModeSpec& mode, double s,
                             std::span<const Point> points);
IdentitySweep identity_sweep_serial(const KerrParams& p, const ModeSpec& mode,
                                    double s, std::span<const Point> points);

}  // namespace kgk
