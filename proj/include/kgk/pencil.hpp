#pragma once

// Finite-dimensional quadratic pencils  lambda -> A~ - lambda B - lambda^2
// for the abstract equation u'' + i B u' + A~ u = 0.
//
// Mode convention: u(t) = exp(i lambda t) psi, so an eigenvalue with
// Im(lambda) < 0 is an exponentially growing solution with rate -Im(lambda).

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kgk {

using cplx = std::complex<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Square complex matrix equal to its conjugate transpose (relative 1e-12).
class HermitianOperator {
 public:
  static HermitianOperator make(Eigen::MatrixXcd entries, double rel_tol = 1e-12);
  static HermitianOperator make_real(const Eigen::MatrixXd& entries);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  bool is_real() const;

 private:
  explicit HermitianOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Eigen::MatrixXcd m_;
};

/// Relative deviation ||X - X^H||_max / ||X||_max (0 for X = 0).
double hermitian_defect(const Eigen::MatrixXcd& x);

enum class Stability { Stable, Unstable };

const char* to_string(Stability s);

struct PencilSpectrum {
  std::vector<cplx> eigenvalues;  // 2n roots, sorted by (Re, Im)
  Stability classification = Stability::Stable;
  double growth_rate = 0.0;  // max(0, max -Im lambda)
  double max_abs_imag = 0.0;
  double tol_imag = 0.0;     // absolute threshold actually applied
};

/// Threshold on |Im lambda|, relative to the spectral radius.
inline constexpr double kTolImag = 1e-8;

PencilSpectrum pencil_eigenvalues(const HermitianOperator& a_tilde,
                                  const HermitianOperator& b);

/// det(A~ - lambda B - lambda^2 I), evaluated directly by LU.
cplx char_poly_value(const HermitianOperator& a_tilde, const HermitianOperator& b,
                     cplx lambda);

/// Coefficients of det(A~ - lambda B - lambda^2 I), highest degree first
/// (2n + 1 entries). Exact cofactor expansion; n <= 10.
std::vector<cplx> char_poly_coefficients(const HermitianOperator& a_tilde,
                                         const HermitianOperator& b);

struct PencilPair {
  HermitianOperator a_tilde;
  HermitianOperator b;
};

/// A~ = diag(1, -1), B = [[3, 1], [1, 3]]: four real roots, negative energy.
PencilPair example_stable();
/// A~ = diag(1, -1), B = [[2.3, 1], [1, 2.3]]: a growing complex pair.
PencilPair example_unstable();

struct QuadraticState {
  Eigen::VectorXcd u;
  Eigen::VectorXcd du;
  double t = 0.0;
};

// Inner products are weighted by a positive diagonal W, <x|y> = sum w_k x_k^* y_k.
// An empty weight vector means the Euclidean product.
cplx weighted_inner(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y,
                    const Eigen::VectorXd& weight);
double weighted_norm(const Eigen::VectorXcd& x, const Eigen::VectorXd& weight);

/// E_u = ||u'||^2 + <u|A~ u>.
double energy(const Eigen::MatrixXcd& a_tilde, const QuadraticState& state,
              const Eigen::VectorXd& weight);
double energy(const HermitianOperator& a_tilde, const QuadraticState& state);

/// E_{s,u} = ||u' + i s u||^2 + <u|(A~ + sB - s^2) u>.
double shifted_energy(const Eigen::MatrixXcd& a_tilde, const Eigen::MatrixXcd& b, double s,
                      const QuadraticState& state, const Eigen::VectorXd& weight);
double shifted_energy(const HermitianOperator& a_tilde, const HermitianOperator& b,
                      double s, const QuadraticState& state);

/// j_{u,v} = <u|v'> - <u'|v> + i <u|B v>.
cplx current(const Eigen::MatrixXcd& b, const QuadraticState& u, const QuadraticState& v,
             const Eigen::VectorXd& weight);
cplx current(const HermitianOperator& b, const QuadraticState& u, const QuadraticState& v);

struct StabilitySearch {
  double best_s = 0.0;
  double min_eig_at_best = 0.0;
  bool certificate = false;      // some s makes A~ + sB - s^2 >= 0
  std::vector<double> min_eigs;  // per grid point, input order
};

/// Scans A~ + sB - s^2 I over s_grid. Ties in the best value go to the
/// smallest |s|.
StabilitySearch stability_search(const HermitianOperator& a_tilde,
                                 const HermitianOperator& b, std::span<const double> s_grid);
StabilitySearch stability_search_serial(const HermitianOperator& a_tilde,
                                        const HermitianOperator& b,
                                        std::span<const double> s_grid);

/// exp(i t B / 2) (A~ + B^2/4) exp(-i t B / 2).
HermitianOperator conjugated_family(const HermitianOperator& a_tilde,
                                    const HermitianOperator& b, double t);

Eigen::VectorXd hermitian_eigenvalues(const HermitianOperator& x);
double min_eigenvalue(const HermitianOperator& x);

/// Evenly spaced grid of `count` points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace kgk
