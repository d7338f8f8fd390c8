#include "kgk/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>

namespace kgk {

namespace {

using Poly = std::vector<cplx>;  // ascending powers

Poly poly_mul(const Poly& x, const Poly& y) {
  Poly out(x.size() + y.size() - 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == cplx{}) continue;
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  }
  return out;
}

void poly_axpy(Poly& acc, const Poly& x, double sign) {
  if (acc.size() < x.size()) acc.resize(x.size(), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) acc[i] += sign * x[i];
}

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
}

void require_state_dim(Eigen::Index n, const QuadraticState& s) {
  if (s.u.size() != n || s.du.size() != n) {
    throw DimensionError("state dimension does not match operator dimension " +
                         std::to_string(n));
  }
}

void require_weight(Eigen::Index n, const Eigen::VectorXd& w) {
  if (w.size() != 0 && w.size() != n) {
    throw DimensionError("weight length does not match operator dimension");
  }
}

Eigen::VectorXcd apply_weight(const Eigen::VectorXcd& x, const Eigen::VectorXd& w) {
  if (w.size() == 0) return x;
  return (w.array().cast<cplx>() * x.array()).matrix();
}

}  // namespace

double hermitian_defect(const Eigen::MatrixXcd& x) {
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (x - x.adjoint()).cwiseAbs().maxCoeff() / scale;
}

HermitianOperator HermitianOperator::make(Eigen::MatrixXcd entries, double rel_tol) {
  if (entries.rows() != entries.cols()) throw DimensionError("operator matrix is not square");
  if (!entries.allFinite()) throw std::invalid_argument("operator matrix has nonfinite entries");
  if (entries.size() > 0 && hermitian_defect(entries) > rel_tol) {
    throw std::invalid_argument("operator matrix is not Hermitian (relative defect " +
                                std::to_string(hermitian_defect(entries)) + ")");
  }
  return HermitianOperator(std::move(entries));
}

HermitianOperator HermitianOperator::make_real(const Eigen::MatrixXd& entries) {
  return make(entries.cast<cplx>());
}

bool HermitianOperator::is_real() const { return m_.imag().isZero(0.0); }

const char* to_string(Stability s) { return s == Stability::Stable ? "Stable" : "Unstable"; }

PencilSpectrum pencil_eigenvalues(const HermitianOperator& a_tilde,
                                  const HermitianOperator& b) {
  require_same_dim(a_tilde, b);
  const Eigen::Index n = a_tilde.dim();
  PencilSpectrum out;
  if (n == 0) return out;

  // Companion form on (psi, lambda psi):  lambda^2 psi = A~ psi - lambda B psi.
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  companion.topRightCorner(n, n).setIdentity();
  companion.bottomLeftCorner(n, n) = a_tilde.matrix();
  companion.bottomRightCorner(n, n) = -b.matrix();

  if (a_tilde.is_real() && b.is_real()) {
    // The real solver returns exact conjugate pairs.
    const Eigen::MatrixXd real_companion = companion.real();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(real_companion, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pencil eigensolver failed");
    const Eigen::VectorXcd ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pencil eigensolver failed");
    const Eigen::VectorXcd ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  }

  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });

  double radius = 0.0;
  for (cplx l : out.eigenvalues) {
    radius = std::max(radius, std::abs(l));
    out.max_abs_imag = std::max(out.max_abs_imag, std::abs(l.imag()));
    out.growth_rate = std::max(out.growth_rate, -l.imag());
  }
  out.tol_imag = kTolImag * (radius > 0.0 ? radius : 1.0);
  out.classification =
      out.max_abs_imag <= out.tol_imag ? Stability::Stable : Stability::Unstable;
  if (out.classification == Stability::Stable) out.growth_rate = 0.0;
  return out;
}

cplx char_poly_value(const HermitianOperator& a_tilde, const HermitianOperator& b,
                     cplx lambda) {
  require_same_dim(a_tilde, b);
  const Eigen::Index n = a_tilde.dim();
  const Eigen::MatrixXcd p = a_tilde.matrix() - lambda * b.matrix() -
                             lambda * lambda * Eigen::MatrixXcd::Identity(n, n);
  return p.determinant();
}

std::vector<cplx> char_poly_coefficients(const HermitianOperator& a_tilde,
                                         const HermitianOperator& b) {
  require_same_dim(a_tilde, b);
  const int n = static_cast<int>(a_tilde.dim());
  if (n > 10) throw DimensionError("char_poly_coefficients supports n <= 10");
  if (n == 0) return {cplx{1.0, 0.0}};

  // entry(i, j) = A~_ij - lambda B_ij - lambda^2 delta_ij
  auto entry = [&](int i, int j) {
    Poly e{a_tilde.matrix()(i, j), -b.matrix()(i, j), cplx{i == j ? -1.0 : 0.0, 0.0}};
    return e;
  };

  // Laplace expansion along rows, memoised on the set of used columns.
  std::unordered_map<unsigned, Poly> memo;
  std::function<Poly(unsigned)> minor_det = [&](unsigned used) -> Poly {
    const int row = __builtin_popcount(used);
    if (row == n) return Poly{cplx{1.0, 0.0}};
    if (auto it = memo.find(used); it != memo.end()) return it->second;
    Poly acc{cplx{0.0, 0.0}};
    int position = 0;
    for (int col = 0; col < n; ++col) {
      if (used & (1u << col)) continue;
      const double sign = (position % 2 == 0) ? 1.0 : -1.0;
      ++position;
      const Poly e = entry(row, col);
      if (e[0] == cplx{} && e[1] == cplx{} && e[2] == cplx{}) continue;
      poly_axpy(acc, poly_mul(e, minor_det(used | (1u << col))), sign);
    }
    memo.emplace(used, acc);
    return acc;
  };

  Poly ascending = minor_det(0u);
  ascending.resize(static_cast<std::size_t>(2 * n + 1), cplx{0.0, 0.0});
  return {ascending.rbegin(), ascending.rend()};
}

PencilPair example_stable() {
  Eigen::Matrix2d a, b;
  a << 1.0, 0.0, 0.0, -1.0;
  b << 3.0, 1.0, 1.0, 3.0;
  return {HermitianOperator::make_real(a), HermitianOperator::make_real(b)};
}

PencilPair example_unstable() {
  Eigen::Matrix2d a, b;
  a << 1.0, 0.0, 0.0, -1.0;
  b << 23.0 / 10.0, 1.0, 1.0, 23.0 / 10.0;
  return {HermitianOperator::make_real(a), HermitianOperator::make_real(b)};
}

cplx weighted_inner(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y,
                    const Eigen::VectorXd& weight) {
  if (x.size() != y.size()) throw DimensionError("inner product of vectors of unequal length");
  require_weight(x.size(), weight);
  return x.dot(apply_weight(y, weight));  // dot conjugates its first argument
}

double weighted_norm(const Eigen::VectorXcd& x, const Eigen::VectorXd& weight) {
  require_weight(x.size(), weight);
  if (weight.size() == 0) return x.norm();
  return std::sqrt((weight.array() * x.array().abs2()).sum());
}

double energy(const Eigen::MatrixXcd& a_tilde, const QuadraticState& state,
              const Eigen::VectorXd& weight) {
  require_state_dim(a_tilde.rows(), state);
  const double kinetic = std::pow(weighted_norm(state.du, weight), 2);
  return kinetic + weighted_inner(state.u, a_tilde * state.u, weight).real();
}

double energy(const HermitianOperator& a_tilde, const QuadraticState& state) {
  return energy(a_tilde.matrix(), state, Eigen::VectorXd());
}

double shifted_energy(const Eigen::MatrixXcd& a_tilde, const Eigen::MatrixXcd& b, double s,
                      const QuadraticState& state, const Eigen::VectorXd& weight) {
  require_state_dim(a_tilde.rows(), state);
  if (b.rows() != a_tilde.rows()) throw DimensionError("operator dimensions differ");
  const Eigen::VectorXcd moved = state.du + cplx{0.0, s} * state.u;
  const Eigen::VectorXcd op_u = a_tilde * state.u + s * (b * state.u) - (s * s) * state.u;
  return std::pow(weighted_norm(moved, weight), 2) +
         weighted_inner(state.u, op_u, weight).real();
}

double shifted_energy(const HermitianOperator& a_tilde, const HermitianOperator& b, double s,
                      const QuadraticState& state) {
  require_same_dim(a_tilde, b);
  return shifted_energy(a_tilde.matrix(), b.matrix(), s, state, Eigen::VectorXd());
}

cplx current(const Eigen::MatrixXcd& b, const QuadraticState& u, const QuadraticState& v,
             const Eigen::VectorXd& weight) {
  require_state_dim(b.rows(), u);
  require_state_dim(b.rows(), v);
  return weighted_inner(u.u, v.du, weight) - weighted_inner(u.du, v.u, weight) +
         cplx{0.0, 1.0} * weighted_inner(u.u, b * v.u, weight);
}

cplx current(const HermitianOperator& b, const QuadraticState& u, const QuadraticState& v) {
  return current(b.matrix(), u, v, Eigen::VectorXd());
}

Eigen::VectorXd hermitian_eigenvalues(const HermitianOperator& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(x.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return solver.eigenvalues();
}

double min_eigenvalue(const HermitianOperator& x) { return hermitian_eigenvalues(x).minCoeff(); }

namespace {

double shifted_min_eig(const HermitianOperator& a_tilde, const HermitianOperator& b,
                       double s) {
  const Eigen::Index n = a_tilde.dim();
  if (a_tilde.is_real() && b.is_real()) {
    Eigen::MatrixXd shifted = a_tilde.matrix().real() + s * b.matrix().real() -
                              (s * s) * Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shifted, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
    return solver.eigenvalues().minCoeff();
  }
  Eigen::MatrixXcd shifted =
      a_tilde.matrix() + s * b.matrix() - (s * s) * Eigen::MatrixXcd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(shifted, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return solver.eigenvalues().minCoeff();
}

StabilitySearch pick_best(std::span<const double> s_grid, std::vector<double> values) {
  StabilitySearch out;
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const bool better = values[k] > values[best];
    const bool tie = values[k] == values[best];
    const double ak = std::abs(s_grid[k]);
    const double ab = std::abs(s_grid[best]);
    if (better || (tie && (ak < ab || (ak == ab && s_grid[k] < s_grid[best])))) best = k;
  }
  out.best_s = s_grid[best];
  out.min_eig_at_best = values[best];
  out.certificate = values[best] >= 0.0;
  out.min_eigs = std::move(values);
  return out;
}

void check_search_args(const HermitianOperator& a, const HermitianOperator& b,
                       std::span<const double> s_grid) {
  require_same_dim(a, b);
  if (s_grid.empty()) throw std::invalid_argument("stability_search: empty s grid");
}

}  // namespace

StabilitySearch stability_search(const HermitianOperator& a_tilde, const HermitianOperator& b,
                                 std::span<const double> s_grid) {
  check_search_args(a_tilde, b, s_grid);
  std::vector<double> values(s_grid.size());
  const auto count = static_cast<std::ptrdiff_t>(s_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    values[idx] = shifted_min_eig(a_tilde, b, s_grid[idx]);
  }
  return pick_best(s_grid, std::move(values));
}

StabilitySearch stability_search_serial(const HermitianOperator& a_tilde,
                                        const HermitianOperator& b,
                                        std::span<const double> s_grid) {
  check_search_args(a_tilde, b, s_grid);
  std::vector<double> values;
  values.reserve(s_grid.size());
  for (double s : s_grid) values.push_back(shifted_min_eig(a_tilde, b, s));
  return pick_best(s_grid, std::move(values));
}

HermitianOperator conjugated_family(const HermitianOperator& a_tilde,
                                    const HermitianOperator& b, double t) {
  require_same_dim(a_tilde, b);
  const Eigen::MatrixXcd core = a_tilde.matrix() + 0.25 * b.matrix() * b.matrix();
  if (t == 0.0) return HermitianOperator::make(core);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(b.matrix());
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  const Eigen::VectorXcd phases =
      (cplx{0.0, 0.5 * t} * solver.eigenvalues().cast<cplx>()).array().exp().matrix();
  const Eigen::MatrixXcd unitary = v * phases.asDiagonal() * v.adjoint();
  const Eigen::MatrixXcd conj = unitary * core * unitary.adjoint();
  return HermitianOperator::make(0.5 * (conj + conj.adjoint()));
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = lo + k * step;
  out.back() = hi;
  return out;
}

}  // namespace kgk
