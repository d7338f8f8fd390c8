#include "kgk/geometry.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

namespace kgk {

namespace {

double sq(double x) { return x * x; }

struct Trig {
  double s, c, s2;
};

Trig trig(double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return {s, c, s * s};
}

// Delta as (r - r_+)(r - r_-); avoids the cancellation in r^2 - 2Mr + a^2
// close to the horizon.
double delta_of(const KerrParams& p, double r) {
  return (r - p.r_plus()) * (r - p.r_minus());
}

// Delta * Sigma_bar without dividing by Delta.
double delta_sigma_bar(const KerrParams& p, double r, const Trig& t, double sigma) {
  const double a2 = sq(p.a());
  return (sq(r) + a2) * sigma + 2.0 * p.M() * a2 * r * t.s2;
}

}  // namespace

KerrParams KerrParams::make(double M, double a) {
  if (!(std::isfinite(M) && M > 0.0)) {
    throw DomainError("KerrParams: mass must be finite and > 0");
  }
  if (!(std::isfinite(a) && a >= 0.0 && a <= M)) {
    throw DomainError("KerrParams: spin must satisfy 0 <= a <= M");
  }
  const double root = std::sqrt((M - a) * (M + a));
  const double rp = M + root;
  // r_- = a^2 / r_+ is exact where M - root would cancel.
  const double rm = a == 0.0 ? 0.0 : a * a / rp;
  return KerrParams(M, a, rp, rm);
}

ModeSpec ModeSpec::make(int m, double mu) {
  if (!(std::isfinite(mu) && mu >= 0.0)) {
    throw DomainError("ModeSpec: field mass must be finite and >= 0");
  }
  return ModeSpec{m, mu};
}

bool is_inside(const KerrParams& p, const Point& q) noexcept {
  return std::isfinite(q.r) && std::isfinite(q.theta) &&
         q.r - p.r_plus() > kBoundaryMargin * p.M() && q.theta > kBoundaryMargin &&
         q.theta < std::numbers::pi - kBoundaryMargin;
}

void require_inside(const KerrParams& p, const Point& q) {
  if (!is_inside(p, q)) {
    throw DomainError("point (r=" + std::to_string(q.r) + ", theta=" +
                      std::to_string(q.theta) +
                      ") is not strictly inside (r_plus, inf) x (0, pi)");
  }
}

Scalars scalars(const KerrParams& p, const Point& q) {
  require_inside(p, q);
  const double M = p.M();
  const double a2 = sq(p.a());
  const double r = q.r;
  const Trig t = trig(q.theta);
  const double delta = delta_of(p, r);
  const double sigma = sq(r) + a2 * sq(t.c);
  Scalars out{};
  out.delta = delta;
  out.sigma = sigma;
  out.sigma_bar_1 = delta_sigma_bar(p, r, t, sigma) / delta;
  out.sigma_bar_2 = sq(sq(r) + a2) / delta - a2 * t.s2;
  out.sigma_bar_3 = sigma + 2.0 * M * r + 4.0 * sq(M * r) / delta;
  return out;
}

MetricComponents metric(const KerrParams& p, const Point& q) {
  const Scalars sc = scalars(p, q);
  const double M = p.M();
  const double a = p.a();
  const double r = q.r;
  const Trig t = trig(q.theta);
  const double sigma = sc.sigma;
  const double delta = sc.delta;

  MetricComponents g{};
  // (Delta - a^2 sin^2) / Sigma equals 1 - 2Mr/Sigma but keeps relative accuracy
  // near the horizon, where 2Mr/Sigma -> 1.
  g.g_tt = (delta - sq(a) * t.s2) / sigma;
  g.g_tphi = 2.0 * M * a * r * t.s2 / sigma;
  g.g_rr = -sigma / delta;
  g.g_thth = -sigma;
  g.g_phph = -delta * sc.sigma_bar_1 * t.s2 / sigma;
  g.rho = delta * t.s2;

  // Contravariant components from their own closed forms rather than by
  // inverting the covariant block.
  g.gi_tt = sc.sigma_bar_1 / sigma;
  g.gi_tphi = 2.0 * M * a * r / (sigma * delta);
  g.gi_rr = -delta / sigma;
  g.gi_thth = -1.0 / sigma;
  g.gi_phph = -(delta - sq(a) * t.s2) / (sigma * delta * t.s2);
  return g;
}

double b_coefficient(const KerrParams& p, int m, const Point& q) {
  require_inside(p, q);
  if (m == 0 || p.a() == 0.0) return 0.0;
  const Trig t = trig(q.theta);
  const double sigma = sq(q.r) + sq(p.a()) * sq(t.c);
  return 4.0 * m * p.M() * p.a() * q.r / delta_sigma_bar(p, q.r, t, sigma);
}

double special_s(const KerrParams& p) { return p.a() / (2.0 * p.M() * p.r_plus()); }

KillingNorm killing_norm(const KerrParams& p, double s, const Point& q) {
  const MetricComponents g = metric(p, q);
  KillingNorm out{};
  out.direct = g.g_tt + 2.0 * s * g.g_tphi + s * s * g.g_phph;

  const double s_star = special_s(p);
  if (std::abs(s - s_star) <= 1e-14 * std::max(1.0, std::abs(s_star))) {
    const double M = p.M();
    const double a2 = sq(p.a());
    const double rp = p.r_plus();
    const Trig t = trig(q.theta);
    const double delta = delta_of(p, q.r);
    const double sigma = -g.g_thth;
    const double bracket =
        sq(2.0 * M * rp - a2 * t.s2) -
        a2 * delta * t.s2 * sq(1.0 + 2.0 * M / (q.r - p.r_minus()));
    out.bracket = bracket;
    out.factored = delta / (4.0 * sq(M * rp) * sigma) * bracket;
  }
  return out;
}

RegionMembership region_membership(const KerrParams& p, const Point& q) {
  require_inside(p, q);
  const double a = p.a();
  if (a == 0.0) return {false, true};
  const double M = p.M();
  const Trig t = trig(q.theta);
  const double delta = delta_of(p, q.r);
  RegionMembership out{};
  out.in_ergoregion = sq(a) * t.s2 - delta > 0.0;
  out.in_omega_e2 = 2.0 * M * p.r_plus() - sq(a) * t.s2 -
                        a * std::sqrt(delta) * t.s * (1.0 + 2.0 * M / (q.r - p.r_minus())) >
                    0.0;
  return out;
}

PotentialVs potential_Vs(const KerrParams& p, const ModeSpec& mode, double s,
                         const Point& q) {
  const Scalars sc = scalars(p, q);
  const double M = p.M();
  const double a = p.a();
  const double r = q.r;
  const double m = mode.m;
  const double mu2 = sq(mode.mu);

  PotentialVs out{};
  const double ma = m * a;
  out.form1 = -sq(ma) / sc.delta + mu2 * sc.sigma + s * 4.0 * m * M * a * r / sc.delta -
              sq(s) * sc.sigma_bar_1;
  out.vs1 = -sq(2.0 * s * M * r - ma) / sc.delta;
  out.vs2 = (mu2 - sq(s)) * sc.sigma - 2.0 * sq(s) * M * r;
  out.form2 = out.vs1 + out.vs2;
  return out;
}

Residual positivity_identity_residual(const KerrParams& p, int m, const Point& q) {
  const Scalars sc = scalars(p, q);
  if (m == 0) return {0.0, 1.0};
  const double m2 = sq(static_cast<double>(m));
  const double a2 = sq(p.a());
  const Trig t = trig(q.theta);
  const double b = b_coefficient(p, m, q);
  const double sb = sc.sigma_bar_1;
  const double lhs = (-m2 * a2 / sc.delta + m2 / t.s2) / sb + 0.25 * sq(b);
  const double rhs = m2 * sq(sc.sigma) / (sc.delta * sq(sb) * t.s2);
  return {std::abs(lhs - rhs), std::max({1.0, std::abs(lhs), std::abs(rhs)})};
}

Residual connection_identity_residual(const KerrParams& p, const ModeSpec& mode,
                                      double s, const Point& q) {
  const Scalars sc = scalars(p, q);
  if (mode.m == 0 && mode.mu == 0.0) return {0.0, 1.0};
  const double m = mode.m;
  const double m2 = sq(m);
  const double mu2 = sq(mode.mu);
  const Trig t = trig(q.theta);

  const double operator_side =
      (-m2 * sq(p.a()) / sc.delta + m2 / t.s2 + mu2 * sc.sigma) / sc.sigma_bar_1 +
      m * s * b_coefficient(p, mode.m, q) - sq(m * s);

  const MetricComponents g = metric(p, q);
  const double xi_norm = g.g_tt + 2.0 * s * g.g_tphi + s * s * g.g_phph;
  const double killing_side = (m2 * xi_norm + mu2 * g.rho) / (-g.g_phph);

  return {std::abs(operator_side - killing_side),
          std::max({1.0, std::abs(operator_side), std::abs(killing_side)})};
}

MuBounds mu_bounds(const KerrParams& p, int m) {
  if (m == 0 || p.a() == 0.0) return {0.0, 0.0, 0.0};
  const double M = p.M();
  const double rp = p.r_plus();
  const double a = p.a();
  const double base = std::abs(m) * a / (2.0 * M * rp);
  MuBounds out{};
  out.mu_old = base * std::sqrt(1.0 + 2.0 * M / rp + sq(a / rp));
  out.mu_new = base * std::sqrt(1.0 + 2.0 * M / rp);
  out.alpha = -sq(base);
  return out;
}

double ergosurface_radius(const KerrParams& p, double theta) {
  const double c = std::cos(theta);
  return p.M() + std::sqrt(sq(p.M()) - sq(p.a() * c));
}

namespace {

GeometryMapRow map_row(const KerrParams& p, double s, const Lattice& lat, int i, int j) {
  const double dr = lat.nr > 1 ? (lat.r_hi - lat.r_lo) / (lat.nr - 1) : 0.0;
  const Point q{lat.r_lo + i * dr, (j + 0.5) * std::numbers::pi / lat.ntheta};
  const MetricComponents g = metric(p, q);
  const RegionMembership reg = region_membership(p, q);
  return {q.r, q.theta, g.g_tt, killing_norm(p, s, q).direct, reg.in_ergoregion,
          reg.in_omega_e2};
}

void check_lattice(const KerrParams& p, const Lattice& lat) {
  if (lat.nr < 1 || lat.ntheta < 1) throw DomainError("lattice: nr, ntheta must be >= 1");
  if (!(lat.r_hi >= lat.r_lo)) throw DomainError("lattice: r_hi must be >= r_lo");
  require_inside(p, {lat.r_lo, 0.5 * std::numbers::pi});
}

struct PointResiduals {
  double sigma_bar, vs_forms, positivity, killing, connection, positivity_lhs;
};

PointResiduals point_residuals(const KerrParams& p, const ModeSpec& mode, double s,
                               const Point& q) {
  PointResiduals out{};
  const Scalars sc = scalars(p, q);
  const double sb = sc.sigma_bar_1;
  out.sigma_bar =
      std::max(std::abs(sb - sc.sigma_bar_2), std::abs(sb - sc.sigma_bar_3)) / std::abs(sb);

  const PotentialVs v = potential_Vs(p, mode, s, q);
  out.vs_forms = std::abs(v.form1 - v.form2) /
                 std::max({1.0, std::abs(v.form1), std::abs(v.form2)});

  const Residual pos = positivity_identity_residual(p, mode.m, q);
  const double m2 = std::max(1.0, sq(static_cast<double>(mode.m)));
  out.positivity = pos.relative() / m2;
  {
    const Trig t = trig(q.theta);
    const double b = b_coefficient(p, mode.m, q);
    const double mm = sq(static_cast<double>(mode.m));
    out.positivity_lhs = (-mm * sq(p.a()) / sc.delta + mm / t.s2) / sb + 0.25 * sq(b);
  }

  const KillingNorm k = killing_norm(p, s, q);
  out.killing = k.factored ? std::abs(k.direct - *k.factored) /
                                 std::max(1.0, std::abs(k.direct))
                           : 0.0;
  out.connection = connection_identity_residual(p, mode, s, q).relative();
  return out;
}

IdentitySweep empty_sweep() {
  return {0.0, 0.0, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
}

}  // namespace

std::vector<GeometryMapRow> geometry_map(const KerrParams& p, double s,
                                         const Lattice& lattice) {
  check_lattice(p, lattice);
  const int total = lattice.nr * lattice.ntheta;
  std::vector<GeometryMapRow> rows(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < total; ++k) {
    rows[static_cast<std::size_t>(k)] =
        map_row(p, s, lattice, k / lattice.ntheta, k % lattice.ntheta);
  }
  return rows;
}

std::vector<GeometryMapRow> geometry_map_serial(const KerrParams& p, double s,
                                                const Lattice& lattice) {
  check_lattice(p, lattice);
  std::vector<GeometryMapRow> rows;
  rows.reserve(static_cast<std::size_t>(lattice.nr) * lattice.ntheta);
  for (int i = 0; i < lattice.nr; ++i) {
    for (int j = 0; j < lattice.ntheta; ++j) rows.push_back(map_row(p, s, lattice, i, j));
  }
  return rows;
}

IdentitySweep identity_sweep(const KerrParams& p, const ModeSpec& mode, double s,
                             std::span<const Point> points) {
  for (const Point& q : points) require_inside(p, q);
  double sigma_bar = 0.0, vs = 0.0, pos = 0.0, kil = 0.0, con = 0.0;
  double lhs_min = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static) \
    reduction(max : sigma_bar, vs, pos, kil, con) reduction(min : lhs_min)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const PointResiduals res = point_residuals(p, mode, s, points[static_cast<std::size_t>(k)]);
    sigma_bar = std::max(sigma_bar, res.sigma_bar);
    vs = std::max(vs, res.vs_forms);
    pos = std::max(pos, res.positivity);
    kil = std::max(kil, res.killing);
    con = std::max(con, res.connection);
    lhs_min = std::min(lhs_min, res.positivity_lhs);
  }
  return {sigma_bar, vs, pos, kil, con, lhs_min};
}

IdentitySweep identity_sweep_serial(const KerrParams& p, const ModeSpec& mode, double s,
                                    std::span<const Point> points) {
  IdentitySweep out = empty_sweep();
  for (const Point& q : points) {
    const PointResiduals res = point_residuals(p, mode, s, q);
    out.sigma_bar = std::max(out.sigma_bar, res.sigma_bar);
    out.vs_forms = std::max(out.vs_forms, res.vs_forms);
    out.positivity = std::max(out.positivity, res.positivity);
    out.killing = std::max(out.killing, res.killing);
    out.connection = std::max(out.connection, res.connection);
    out.min_positivity_lhs = std::min(out.min_positivity_lhs, res.positivity_lhs);
  }
  return out;
}

}  // namespace kgk
