#pragma once

// Time integration of u'' + i B u' + A~ u = 0 with conserved-quantity
// tracking.
//
// The first-order system y' = M y, y = (u, u'), M = [[0, I], [-A~, -iB]], is
// advanced with the implicit midpoint rule. The 2n x 2n step is reduced to
// one n x n solve,
//     (I + i h/2 B + h^2/4 A~) v+ = v - h A~ u - h^2/4 A~ v - i h/2 B v,
//     u+ = u + h/2 (v + v+),
// factored once per run. Implicit midpoint preserves every quadratic first
// integral of a linear system, so E_u, E_{s,u} and j_{u,v} drift only by
// roundoff.

#include "kgk/discretization.hpp"
#include "kgk/pencil.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace kgk {

/// A~ and B together with the weight of the inner product in which both are
/// symmetric. An empty weight is the Euclidean product.
struct LinearSystem {
  Eigen::MatrixXcd a_tilde;
  Eigen::MatrixXcd b;
  Eigen::VectorXd weight;

  static LinearSystem euclidean(const HermitianOperator& a_tilde, const HermitianOperator& b);
  static LinearSystem from_discretized(const DiscretizedSystem& sys);

  Eigen::Index n() const { return a_tilde.rows(); }
  /// Throws unless W A~ and W B are Hermitian (relative 1e-10).
  void validate() const;
};

struct EvolutionConfig {
  double dt = 1e-3;
  double T = 1.0;
  int record_every = 1;
  std::vector<double> s_list;
  bool keep_states = true;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> u;  // empty unless keep_states
  std::vector<Eigen::VectorXcd> du;
  std::vector<double> norm;
  std::vector<double> energy;
  std::vector<double> shifts;
  std::vector<std::vector<double>> shifted_energy;  // [shift][record]
  std::vector<cplx> current;                        // against the reference, if any
  Eigen::VectorXd weight;
  double dt = 0.0;
  int record_every = 1;
  bool aborted = false;  // nonfinite state or diagnostic met; records end at the last good one

  std::size_t size() const { return times.size(); }
};

/// Integrates from `initial`. With a reference state, a second solution is
/// advanced in lock step and j_{u,v} against it is recorded.
Trajectory evolve(const LinearSystem& sys, const QuadraticState& initial,
                  const EvolutionConfig& cfg,
                  const std::optional<QuadraticState>& reference = std::nullopt);

struct ConservationDrift {
  double max_rel_drift_E = 0.0;
  double max_rel_drift_Es = 0.0;
  double max_drift_j = 0.0;
};

/// Largest deviation from the first record, relative to its magnitude
/// (absolute when the first value is zero).
ConservationDrift conserved_series_check(const Trajectory& traj);

/// Norm bound on ||u(t1 + span)|| from ||u(t1)||, the energy E and a lower
/// bound gamma of the energy operator.
double gronwall_bound(double gamma, double E, double norm_t1, double span);

/// True iff every recorded pair t1 <= t2 satisfies
/// ||u(t2)|| <= gronwall_bound(gamma, E, ||u(t1)||, t2 - t1) (1 + 1e-9).
/// `shift_index` selects E_{s,u} for the s at that index instead of E_u.
bool certify_bounds(const Trajectory& traj, double gamma,
                    std::optional<std::size_t> shift_index = std::nullopt);

/// max_n ||v'' + A(t_n) v|| over interior records, v(t) = exp(i t B/2) u(t),
/// with v'' from centred second differences. Requires record_every = 1.
double v_transform_residual(const LinearSystem& sys, const Trajectory& traj);

/// Least-squares slope of log ||u|| over the trailing fraction of the
/// record; |slope| < kGrowthThreshold is reported as 0.
double growth_rate_estimate(const Trajectory& traj, double window_fraction);

inline constexpr double kGrowthThreshold = 1e-3;

/// CSV with header t,norm,E_u,E_s_u[s=...]...[,j_re,j_im]; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace kgk
