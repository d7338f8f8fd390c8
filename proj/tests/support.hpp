#pragma once

// Shared test helpers: a deterministic point sampler and independent
// reference computations (long double evaluation, polynomial root finding).

#include "kgk/geometry.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace kgk::test {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(gen_() % (hi - lo + 1)); }

  /// r - r_plus log-uniform on [1e-9, 1e2] M, theta uniform on
  /// (1e-9, pi - 1e-9).
  Point point(const KerrParams& p) {
    const double r = p.r_plus() + p.M() * std::pow(10.0, uniform(-9.0, 2.0));
    const double th = uniform(1e-9, std::numbers::pi - 1e-9);
    return {r, th};
  }

  /// Point of the ergoregion a^2 sin^2 > Delta, by rejection on
  /// (r_plus, 2M] x (0, pi). Requires a > 0.
  Point ergoregion_point(const KerrParams& p) {
    for (;;) {
      const double r = uniform(p.r_plus(), 2.0 * p.M());
      const double th = uniform(1e-6, std::numbers::pi - 1e-6);
      const Point q{r, th};
      if (!is_inside(p, q)) continue;
      const double s2 = std::sin(th) * std::sin(th);
      const double delta = r * r - 2.0 * p.M() * r + p.a() * p.a();
      if (p.a() * p.a() * s2 - delta > 0.0) return q;
    }
  }

 private:
  std::mt19937_64 gen_;
};

inline std::vector<KerrParams> parameter_sets() {
  return {KerrParams::make(1.0, 0.0), KerrParams::make(1.0, 0.3), KerrParams::make(1.0, 0.5),
          KerrParams::make(1.0, 0.999), KerrParams::make(2.5, 1.7)};
}

// ---------------------------------------------------------------------------
// long double references, written straight from the Boyer-Lindquist
// expressions with Delta = r^2 - 2Mr + a^2.

struct LdScalars {
  long double delta, sigma, sigma_bar, sin2;
};

inline LdScalars ld_scalars(long double M, long double a, long double r, long double th) {
  const long double s = std::sin(th);
  const long double c = std::cos(th);
  LdScalars o;
  o.sin2 = s * s;
  o.delta = r * r - 2 * M * r + a * a;
  o.sigma = r * r + a * a * c * c;
  o.sigma_bar = ((r * r + a * a) * o.sigma + 2 * M * a * a * r * o.sin2) / o.delta;
  return o;
}

/// Both sides of (1/Sb)(-m^2a^2/Delta + m^2/sin^2) + b^2/4 = m^2 Sigma^2/(Delta Sb^2 sin^2).
inline std::pair<long double, long double> ld_positivity_sides(long double M, long double a,
                                                               int m, long double r,
                                                               long double th) {
  const LdScalars q = ld_scalars(M, a, r, th);
  const long double mm = m;
  const long double b = 4 * mm * M * a * r / (q.delta * q.sigma_bar);
  const long double lhs =
      (-mm * mm * a * a / q.delta + mm * mm / q.sin2) / q.sigma_bar + b * b / 4;
  const long double rhs =
      mm * mm * q.sigma * q.sigma / (q.delta * q.sigma_bar * q.sigma_bar * q.sin2);
  return {lhs, rhs};
}

/// Covariant t-phi block and the Killing norm of d_t + s d_phi.
inline long double ld_killing_norm(long double M, long double a, long double s, long double r,
                                   long double th) {
  const LdScalars q = ld_scalars(M, a, r, th);
  const long double g_tt = 1 - 2 * M * r / q.sigma;
  const long double g_tph = 2 * M * a * r * q.sin2 / q.sigma;
  const long double g_phph = -((r * r + a * a) * (r * r + a * a) - a * a * q.delta * q.sin2) *
                             q.sin2 / q.sigma;
  return g_tt + 2 * s * g_tph + s * s * g_phph;
}

// ---------------------------------------------------------------------------

using cld = std::complex<long double>;

/// All roots of sum_k c[k] x^(deg-k) (c[0] != 0) by Durand-Kerner.
inline std::vector<cld> durand_kerner(const std::vector<long double>& c) {
  const std::size_t deg = c.size() - 1;
  std::vector<cld> z(deg);
  const cld seed(0.4L, 0.9L);
  cld w(1.0L, 0.0L);
  for (std::size_t k = 0; k < deg; ++k) {
    z[k] = w * 3.0L;
    w *= seed;
  }
  auto eval = [&](cld x) {
    cld acc = 0;
    for (long double ck : c) acc = acc * x + ck;
    return acc / c[0];
  };
  for (int it = 0; it < 5000; ++it) {
    long double change = 0;
    for (std::size_t k = 0; k < deg; ++k) {
      cld den = 1;
      for (std::size_t j = 0; j < deg; ++j) {
        if (j != k) den *= z[k] - z[j];
      }
      const cld step = eval(z[k]) / den;
      z[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-30L) break;
  }
  return z;
}

}  // namespace kgk::test
