#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kgk/geometry.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace kgk;
using kgk::test::Sampler;

namespace {
constexpr double kPi = std::numbers::pi;
double sq(double x) { return x * x; }
}  // namespace

TEST_CASE("KerrParams horizon radii") {
  for (double a : {0.0, 0.1, 0.5, 0.9, 0.999, 1.0}) {
    const KerrParams p = KerrParams::make(1.0, a);
    CHECK(p.r_plus() >= p.r_minus());
    CHECK(p.r_minus() >= 0.0);
    CHECK(p.r_plus() == doctest::Approx(1.0 + std::sqrt(1.0 - a * a)).epsilon(1e-15));
    if (a > 0.0) {
      CHECK(std::abs(p.r_plus() * p.r_minus() - a * a) <= 1e-12 * a * a);
    }
  }
  const KerrParams heavy = KerrParams::make(3.0, 2.0);
  CHECK(heavy.r_plus() == doctest::Approx(3.0 + std::sqrt(5.0)));

  CHECK_THROWS_AS(KerrParams::make(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(KerrParams::make(-1.0, 0.0), DomainError);
  CHECK_THROWS_AS(KerrParams::make(1.0, 1.0 + 1e-12), DomainError);
  CHECK_THROWS_AS(KerrParams::make(1.0, -0.1), DomainError);
  CHECK_THROWS_AS(KerrParams::make(NAN, 0.0), DomainError);
  CHECK_THROWS_AS(ModeSpec::make(1, -0.5), DomainError);
}

TEST_CASE("points on the horizon, the poles or outside the slice are rejected") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  CHECK_THROWS_AS(scalars(p, {p.r_plus(), 1.0}), DomainError);
  CHECK_THROWS_AS(scalars(p, {p.r_plus() + 1e-11, 1.0}), DomainError);
  CHECK_THROWS_AS(scalars(p, {1.5, 1.0}), DomainError);
  CHECK_THROWS_AS(scalars(p, {3.0, 0.0}), DomainError);
  CHECK_THROWS_AS(scalars(p, {3.0, kPi}), DomainError);
  CHECK_THROWS_AS(scalars(p, {3.0, 5e-11}), DomainError);
  CHECK_THROWS_AS(b_coefficient(p, 1, {3.0, -0.1}), DomainError);
  CHECK_THROWS_AS(region_membership(p, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(killing_norm(p, 0.1, {3.0, 0.0}), DomainError);
  CHECK_NOTHROW(scalars(p, {p.r_plus() + 1e-6, 1e-6}));
}

TEST_CASE("scalars at simple points") {
  const Scalars s = scalars(KerrParams::make(1.0, 0.0), {4.0, kPi / 2});
  CHECK(s.sigma_bar_1 == doctest::Approx(32.0).epsilon(1e-15));
  CHECK(s.sigma_bar_2 == doctest::Approx(32.0).epsilon(1e-15));
  CHECK(s.sigma_bar_3 == doctest::Approx(32.0).epsilon(1e-15));

  // theta = 0 lies on the axis and is rejected; approach it instead.
  const KerrParams ext = KerrParams::make(1.0, 1.0);
  CHECK_THROWS_AS(scalars(ext, {2.0, 0.0}), DomainError);
  const Scalars t = scalars(ext, {2.0, 1e-7});
  CHECK(t.delta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.sigma == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("three forms of Sigma_bar agree on random points") {
  Sampler rng(11);
  for (const KerrParams& p : kgk::test::parameter_sets()) {
    for (int k = 0; k < 2000; ++k) {
      const Scalars s = scalars(p, rng.point(p));
      CHECK(std::abs(s.sigma_bar_1 - s.sigma_bar_2) <= 1e-12 * std::abs(s.sigma_bar_1));
      CHECK(std::abs(s.sigma_bar_1 - s.sigma_bar_3) <= 1e-12 * std::abs(s.sigma_bar_1));
      CHECK(s.delta > 0.0);
    }
  }
}

TEST_CASE("metric components: inverse relations and rho") {
  Sampler rng(12);
  for (const KerrParams& p : kgk::test::parameter_sets()) {
    for (int k = 0; k < 500; ++k) {
      const Point q = rng.point(p);
      const MetricComponents g = metric(p, q);
      const double rho = g.rho;
      CHECK(std::abs(g.gi_tt + g.g_phph / rho) <= 1e-12 * std::abs(g.gi_tt));
      // g_tt = 1 - 2Mr/Sigma cancels near the ergosurface; judge against its terms.
      const double tt_terms = 1.0 + 2.0 * p.M() * q.r / (-g.g_thth);
      CHECK(std::abs(g.gi_phph + g.g_tt / rho) <= 1e-12 * tt_terms / rho);
      if (p.a() > 0.0) {
        CHECK(std::abs(g.gi_tphi - g.g_tphi / rho) <= 1e-12 * std::abs(g.gi_tphi));
      }
      const double det = g.g_tt * g.g_phph - sq(g.g_tphi);
      const double scale = std::max(tt_terms * std::abs(g.g_phph), sq(g.g_tphi));
      CHECK(std::abs(rho + det) <= 1e-12 * scale);
      CHECK(g.g_rr * g.gi_rr == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(g.g_thth * g.gi_thth == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  // Schwarzschild limit.
  const MetricComponents s = metric(KerrParams::make(1.0, 0.0), {4.0, kPi / 2});
  CHECK(s.g_tt == doctest::Approx(0.5));
  CHECK(s.g_tphi == 0.0);
  CHECK(s.g_rr == doctest::Approx(-2.0));
  CHECK(s.g_phph == doctest::Approx(-16.0));
}

TEST_CASE("b coefficient") {
  Sampler rng(13);
  const KerrParams p = KerrParams::make(1.0, 0.5);
  const KerrParams s = KerrParams::make(1.0, 0.0);
  for (int k = 0; k < 200; ++k) {
    const Point q = rng.point(p);
    CHECK(b_coefficient(p, 0, q) == 0.0);
    CHECK(b_coefficient(s, 3, rng.point(s)) == 0.0);
    const int m = rng.integer(-4, 4);
    const double b = b_coefficient(p, m, q);
    CHECK(std::isfinite(b));
    if (m > 0) CHECK(b > 0.0);
    if (m < 0) CHECK(b < 0.0);
    CHECK(b_coefficient(p, -m, q) == -b);
  }
  // 4 m M a r / ((r^2+a^2) Sigma + 2 M a^2 r sin^2) with r = 3, theta = pi/2.
  CHECK(b_coefficient(p, 1, {3.0, kPi / 2}) == doctest::Approx(6.0 / 84.75).epsilon(1e-14));
  CHECK(b_coefficient(p, 1, {3.0, kPi / 2}) == doctest::Approx(0.0708).epsilon(1e-3));
}

TEST_CASE("special_s") {
  CHECK(special_s(KerrParams::make(1.0, 0.0)) == 0.0);
  CHECK(special_s(KerrParams::make(1.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(special_s(KerrParams::make(1.0, 0.5)) == doctest::Approx(0.5 / (2.0 * 1.8660254037844386)));
  CHECK(special_s(KerrParams::make(1.0, 0.5)) == doctest::Approx(0.1339746).epsilon(1e-7));
}

TEST_CASE("Killing norm") {
  const KillingNorm s = killing_norm(KerrParams::make(1.0, 0.0), 0.0, {4.0, kPi / 2});
  CHECK(s.direct == doctest::Approx(0.5));

  const KerrParams p = KerrParams::make(1.0, 0.5);
  const KillingNorm near = killing_norm(p, special_s(p), {p.r_plus() + 1e-8, kPi / 2});
  CHECK(std::abs(near.direct) <= 1e-6);
  REQUIRE(near.factored.has_value());
  REQUIRE(near.bracket.has_value());
  CHECK(*near.bracket > 0.0);

  CHECK_FALSE(killing_norm(p, 0.2, {3.0, 1.0}).factored.has_value());

  Sampler rng(14);
  for (const KerrParams& pp : kgk::test::parameter_sets()) {
    if (pp.a() == 0.0) continue;
    const double s_star = special_s(pp);
    for (int k = 0; k < 2000; ++k) {
      const Point q = rng.point(pp);
      const KillingNorm kn = killing_norm(pp, s_star, q);
      REQUIRE(kn.factored.has_value());
      CHECK(std::abs(kn.direct - *kn.factored) <= 1e-10 * std::max(1.0, std::abs(kn.direct)));
      const long double ref = kgk::test::ld_killing_norm(pp.M(), pp.a(), s_star, q.r, q.theta);
      CHECK(std::abs(kn.direct - static_cast<double>(ref)) <=
            1e-10 * std::max(1.0, std::abs(kn.direct)));
    }
  }
}

TEST_CASE("Killing norm at extremal spin stays finite off the horizon") {
  const KerrParams p = KerrParams::make(1.0, 1.0);
  const KillingNorm kn = killing_norm(p, special_s(p), {1.0 + 1e-3, kPi / 2});
  CHECK(std::isfinite(kn.direct));
  REQUIRE(kn.factored.has_value());
  CHECK(std::isfinite(*kn.factored));
  CHECK(std::abs(kn.direct - *kn.factored) <= 1e-10 * std::max(1.0, std::abs(kn.direct)));
  const RegionMembership reg = region_membership(p, {1.0 + 1e-3, kPi / 2});
  CHECK(reg.in_ergoregion);
}

TEST_CASE("region membership") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  CHECK(region_membership(p, {1.9, kPi / 2}).in_ergoregion);
  CHECK_FALSE(region_membership(p, {3.0, kPi / 2}).in_ergoregion);
  const RegionMembership s = region_membership(KerrParams::make(1.0, 0.0), {2.5, 1.0});
  CHECK_FALSE(s.in_ergoregion);
  CHECK(s.in_omega_e2);

  // The ergoregion is bounded by r = M + sqrt(M^2 - a^2 cos^2).
  Sampler rng(15);
  for (double a : {0.3, 0.7, 0.95}) {
    const KerrParams pp = KerrParams::make(1.0, a);
    for (int k = 0; k < 1000; ++k) {
      const Point q{pp.r_plus() + rng.uniform(1e-6, 1.5), rng.uniform(1e-3, kPi - 1e-3)};
      const double re = ergosurface_radius(pp, q.theta);
      if (std::abs(q.r - re) < 1e-9) continue;
      CHECK(region_membership(pp, q).in_ergoregion == (q.r < re));
    }
  }
  // Omega_e2 membership agrees with the sign of the timelike Killing norm.
  for (int k = 0; k < 1000; ++k) {
    const Point q = rng.point(p);
    const double kn = killing_norm(p, special_s(p), q).direct;
    if (std::abs(kn) < 1e-9) continue;
    CHECK(region_membership(p, q).in_omega_e2 == (kn > 0.0));
  }
}

TEST_CASE("ergoregion lies inside Omega_e2 for a/M <= sqrt(3)/3") {
  Sampler rng(16);
  const double a_max = std::sqrt(3.0) / 3.0;
  for (int k = 1; k <= 5; ++k) {
    const KerrParams p = KerrParams::make(1.0, a_max * k / 5.0);
    for (int j = 0; j < 200; ++j) {
      const Point q = rng.ergoregion_point(p);
      CHECK(region_membership(p, q).in_omega_e2);
    }
  }
}

TEST_CASE("potential V_s") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  const PotentialVs z = potential_Vs(p, ModeSpec::make(0, 0.0), 0.0, {3.0, 1.0});
  CHECK(z.form1 == 0.0);
  CHECK(z.form2 == 0.0);
  CHECK(z.vs1 == 0.0);
  CHECK(z.vs2 == 0.0);

  const double s_star = special_s(p);
  const ModeSpec bound = ModeSpec::make(1, mu_bounds(p, 1).mu_new);
  Sampler rng(17);
  for (int k = 0; k < 2000; ++k) {
    const Point q = rng.point(p);
    const PotentialVs v = potential_Vs(p, bound, s_star, q);
    CHECK(v.vs1 >= -1.0 - 1e-12);
    CHECK(v.vs2 >= -1e-12 * std::max(1.0, sq(s_star) * q.r * q.r));
  }
  for (const KerrParams& pp : kgk::test::parameter_sets()) {
    for (int k = 0; k < 2000; ++k) {
      const ModeSpec mode = ModeSpec::make(rng.integer(-3, 3), rng.uniform(0.0, 1.0));
      const double s = rng.uniform(-1.0, 1.0);
      const PotentialVs v = potential_Vs(pp, mode, s, rng.point(pp));
      const double scale = std::max({1.0, std::abs(v.form1), std::abs(v.form2)});
      CHECK(std::abs(v.form1 - v.form2) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("positivity identity") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  const Residual zero = positivity_identity_residual(p, 0, {3.0, 1.0});
  CHECK(zero.abs == 0.0);

  const Residual r1 = positivity_identity_residual(p, 2, {3.0, kPi / 3});
  CHECK(r1.abs <= 1e-10 * r1.scale);

  const KerrParams fast = KerrParams::make(1.0, 0.999);
  const Point near{fast.r_plus() + 0.01, kPi / 2};
  const Residual r2 = positivity_identity_residual(fast, 5, near);
  CHECK(r2.abs <= 1e-8 * r2.scale);
  const auto [lhs, rhs] = kgk::test::ld_positivity_sides(1.0L, 0.999L, 5, near.r, near.theta);
  CHECK(std::abs(static_cast<double>(lhs - rhs)) <= 1e-15L * std::abs(lhs));
  CHECK(lhs > 0.0L);

  Sampler rng(18);
  for (const KerrParams& pp : kgk::test::parameter_sets()) {
    for (int k = 0; k < 2000; ++k) {
      const int m = rng.integer(-5, 5);
      const Residual r = positivity_identity_residual(pp, m, rng.point(pp));
      CHECK(r.abs <= 1e-10 * std::max(1.0, double(m * m)) * r.scale);
    }
  }
}

TEST_CASE("connection identity") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  CHECK(connection_identity_residual(p, ModeSpec::make(0, 0.0), 0.3, {3.0, 1.0}).abs == 0.0);

  const Residual r1 = connection_identity_residual(KerrParams::make(1.0, 0.7),
                                                   ModeSpec::make(1, 0.3), 0.1, {2.5, 1.0});
  CHECK(r1.relative() <= 1e-10);
  const Residual r2 =
      connection_identity_residual(p, ModeSpec::make(2, 0.0), special_s(p), {5.0, kPi / 4});
  CHECK(r2.relative() <= 1e-10);
  const Residual eq = connection_identity_residual(p, ModeSpec::make(1, 0.2), 0.3, {4.0, kPi / 2});
  CHECK(eq.relative() <= 1e-10);

  Sampler rng(19);
  for (const KerrParams& pp : kgk::test::parameter_sets()) {
    for (int k = 0; k < 2000; ++k) {
      const ModeSpec mode = ModeSpec::make(rng.integer(-3, 3), rng.uniform(0.0, 1.0));
      const Residual r = connection_identity_residual(pp, mode, rng.uniform(-1.0, 1.0),
                                                      rng.point(pp));
      CHECK(r.relative() <= 1e-10);
    }
  }
}

TEST_CASE("mass bounds") {
  const MuBounds z = mu_bounds(KerrParams::make(1.0, 0.5), 0);
  CHECK(z.mu_old == 0.0);
  CHECK(z.mu_new == 0.0);
  CHECK(z.alpha == 0.0);

  const MuBounds b = mu_bounds(KerrParams::make(1.0, 0.5), 1);
  CHECK(b.mu_new == doctest::Approx(0.19284).epsilon(1e-5));
  CHECK(b.mu_old == doctest::Approx(0.19615).epsilon(1e-5));
  CHECK(mu_bounds(KerrParams::make(1.0, 1.0), 1).alpha == doctest::Approx(-0.25).epsilon(1e-15));

  Sampler rng(20);
  for (int k = 0; k < 1000; ++k) {
    const double M = rng.uniform(0.1, 10.0);
    const double a = (k % 10 == 0) ? 0.0 : rng.uniform(0.0, M);
    const int m = rng.integer(-6, 6);
    const MuBounds mb = mu_bounds(KerrParams::make(M, a), m);
    CHECK(mb.mu_new <= mb.mu_old);
    const bool vanish = m == 0 || a == 0.0;
    CHECK((mb.mu_new == 0.0) == vanish);
    CHECK((mb.mu_old == 0.0) == vanish);
    if (!vanish) CHECK(mb.mu_new < mb.mu_old);
    CHECK(mb.alpha <= 0.0);
    CHECK(mu_bounds(KerrParams::make(M, a), -m).mu_new == mb.mu_new);
  }
}

TEST_CASE("identity sweep summarises the pointwise residuals") {
  Sampler rng(21);
  const KerrParams p = KerrParams::make(1.0, 0.7);
  std::vector<Point> pts;
  for (int k = 0; k < 500; ++k) pts.push_back(rng.point(p));
  const ModeSpec mode = ModeSpec::make(2, 0.4);
  const IdentitySweep sw = identity_sweep(p, mode, special_s(p), pts);
  CHECK(sw.sigma_bar <= 1e-12);
  CHECK(sw.vs_forms <= 1e-10);
  CHECK(sw.positivity <= 1e-10);
  CHECK(sw.killing <= 1e-10);
  CHECK(sw.connection <= 1e-10);
  CHECK(sw.min_positivity_lhs >= 0.0);

  double worst = 0.0;
  for (const Point& q : pts) {
    worst = std::max(worst, connection_identity_residual(p, mode, special_s(p), q).relative());
  }
  CHECK(sw.connection == worst);

  pts.push_back({0.5, 1.0});
  CHECK_THROWS_AS(identity_sweep(p, mode, 0.1, pts), DomainError);
}

TEST_CASE("geometry map lattice") {
  const KerrParams s = KerrParams::make(1.0, 0.0);
  const auto rows = geometry_map(s, 0.0, {2.01, 10.0, 12, 7});
  REQUIRE(rows.size() == 84);
  for (const GeometryMapRow& row : rows) {
    CHECK_FALSE(row.in_ergoregion);
    CHECK(row.in_omega_e2);
    CHECK(row.g_tt == doctest::Approx(1.0 - 2.0 / row.r));
  }
  CHECK(rows.front().r == 2.01);
  CHECK(rows.back().r == doctest::Approx(10.0));
  CHECK(rows[0].theta == doctest::Approx(kPi / 14));
  CHECK_THROWS_AS(geometry_map(s, 0.0, {1.5, 10.0, 5, 5}), DomainError);
}
