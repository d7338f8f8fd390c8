#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kgk/discretization.hpp"
#include "kgk/geometry.hpp"
#include "kgk/pencil.hpp"
#include "support.hpp"

#include <omp.h>

#include <cstring>
#include <vector>

using namespace kgk;

// Every OpenMP kernel must agree bit for bit with its serial reference,
// whatever the thread count.

namespace {

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

bool same_bits(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

bool same_bits(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

const int kThreadCounts[] = {1, 2, 3, 7};

}  // namespace

TEST_CASE("geometry_map") {
  for (const KerrParams& p : test::parameter_sets()) {
    const Lattice lat{p.r_plus() + 1e-3 * p.M(), 6.0 * p.M(), 37, 19};
    const double s = p.a() > 0.0 ? special_s(p) : 0.1;
    const auto ref = geometry_map_serial(p, s, lat);
    for (int t : kThreadCounts) {
      omp_set_num_threads(t);
      const auto got = geometry_map(p, s, lat);
      REQUIRE(got.size() == ref.size());
      bool equal = true;
      for (std::size_t k = 0; k < ref.size(); ++k) {
        equal = equal && same_bits(got[k].r, ref[k].r) && same_bits(got[k].theta, ref[k].theta) &&
                same_bits(got[k].g_tt, ref[k].g_tt) &&
                same_bits(got[k].killing_norm, ref[k].killing_norm) &&
                got[k].in_ergoregion == ref[k].in_ergoregion &&
                got[k].in_omega_e2 == ref[k].in_omega_e2;
      }
      CHECK(equal);
    }
  }
}

TEST_CASE("identity_sweep") {
  test::Sampler rng(11);
  for (const KerrParams& p : test::parameter_sets()) {
    std::vector<Point> pts;
    for (int k = 0; k < 2000; ++k) pts.push_back(rng.point(p));
    const ModeSpec mode = ModeSpec::make(2, 0.3);
    const double s = p.a() > 0.0 ? special_s(p) : 0.2;
    const IdentitySweep ref = identity_sweep_serial(p, mode, s, pts);
    for (int t : kThreadCounts) {
      omp_set_num_threads(t);
      const IdentitySweep got = identity_sweep(p, mode, s, pts);
      CHECK(same_bits(got.sigma_bar, ref.sigma_bar));
      CHECK(same_bits(got.vs_forms, ref.vs_forms));
      CHECK(same_bits(got.positivity, ref.positivity));
      CHECK(same_bits(got.killing, ref.killing));
      CHECK(same_bits(got.connection, ref.connection));
      CHECK(same_bits(got.min_positivity_lhs, ref.min_positivity_lhs));
    }
  }
}

TEST_CASE("assemble") {
  const KerrParams p = KerrParams::make(1.0, 0.7);
  const Grid g = Grid::make(p, 23, 11);
  const DiscretizedSystem ref = assemble_serial(p, ModeSpec::make(2, 0.4), g);
  for (int t : kThreadCounts) {
    omp_set_num_threads(t);
    const DiscretizedSystem got = assemble(p, ModeSpec::make(2, 0.4), g);
    CHECK(same_bits(got.stiffness, ref.stiffness));
    CHECK(same_bits(got.weight, ref.weight));
    CHECK(same_bits(got.b, ref.b));
  }
}

TEST_CASE("stability_search") {
  const KerrParams p = KerrParams::make(1.0, 0.5);
  const DiscretizedSystem sys = assemble_serial(p, ModeSpec::make(1, 0.1), Grid::make(p, 12, 6));
  const HermitianOperator a = HermitianOperator::make_real(sys.symmetric_a());
  const HermitianOperator b = HermitianOperator::make_real(sys.b.asDiagonal().toDenseMatrix());
  const std::vector<double> grid = linspace(-0.3, 0.5, 17);
  const StabilitySearch ref = stability_search_serial(a, b, grid);
  for (int t : kThreadCounts) {
    omp_set_num_threads(t);
    const StabilitySearch got = stability_search(a, b, grid);
    CHECK(same_bits(got.best_s, ref.best_s));
    CHECK(same_bits(got.min_eig_at_best, ref.min_eig_at_best));
    CHECK(got.certificate == ref.certificate);
    REQUIRE(got.min_eigs.size() == ref.min_eigs.size());
    for (std::size_t k = 0; k < ref.min_eigs.size(); ++k) {
      CHECK(same_bits(got.min_eigs[k], ref.min_eigs[k]));
    }
  }

  const PencilPair ex = example_unstable();
  const StabilitySearch r2 = stability_search_serial(ex.a_tilde, ex.b, grid);
  omp_set_num_threads(3);
  const StabilitySearch g2 = stability_search(ex.a_tilde, ex.b, grid);
  CHECK(same_bits(g2.best_s, r2.best_s));
  CHECK(same_bits(g2.min_eig_at_best, r2.min_eig_at_best));
}

TEST_CASE("scan_mass_bounds") {
  std::vector<MassBoundCase> cases;
  for (double a : {0.3, 0.5, 0.9}) {
    for (int m : {1, 2}) cases.push_back({1.0, a, m});
  }
  const auto ref = scan_mass_bounds_serial(cases, 10, 6);
  for (int t : kThreadCounts) {
    omp_set_num_threads(t);
    const auto got = scan_mass_bounds(cases, 10, 6);
    REQUIRE(got.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(same_bits(got[k].min_eigenvalue, ref[k].min_eigenvalue));
      CHECK(same_bits(got[k].tol_pos, ref[k].tol_pos));
      CHECK(got[k].passed == ref[k].passed);
      CHECK(got[k].m == cases[k].m);
      CHECK(got[k].a == cases[k].a);
    }
  }
}
