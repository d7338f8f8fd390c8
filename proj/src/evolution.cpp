#include "kgk/evolution.hpp"

#include "kgk/matrix_io.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace kgk {

LinearSystem LinearSystem::euclidean(const HermitianOperator& a_tilde,
                                     const HermitianOperator& b) {
  if (a_tilde.dim() != b.dim()) throw DimensionError("operator dimensions differ");
  return {a_tilde.matrix(), b.matrix(), Eigen::VectorXd()};
}

LinearSystem LinearSystem::from_discretized(const DiscretizedSystem& sys) {
  LinearSystem out;
  out.a_tilde = sys.a_h().cast<cplx>();
  out.b = sys.b.cast<cplx>().asDiagonal();
  out.weight = sys.weight;
  return out;
}

void LinearSystem::validate() const {
  const Eigen::Index n = a_tilde.rows();
  if (a_tilde.cols() != n || b.rows() != n || b.cols() != n) {
    throw DimensionError("LinearSystem: A~ and B must be square of equal size");
  }
  if (weight.size() != 0 && weight.size() != n) {
    throw DimensionError("LinearSystem: weight length does not match dimension");
  }
  if (weight.size() != 0 && !(weight.array() > 0.0).all()) {
    throw std::invalid_argument("LinearSystem: weights must be positive");
  }
  auto weighted = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
    if (weight.size() == 0) return x;
    return weight.cast<cplx>().asDiagonal() * x;
  };
  if (hermitian_defect(weighted(a_tilde)) > 1e-10) {
    throw std::invalid_argument("LinearSystem: A~ is not symmetric in the weighted product");
  }
  if (hermitian_defect(weighted(b)) > 1e-10) {
    throw std::invalid_argument("LinearSystem: B is not symmetric in the weighted product");
  }
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !(T > 0.0) || dt > T) {
    throw std::invalid_argument("EvolutionConfig: need dt > 0, T > 0 and dt <= T");
  }
  if (record_every < 1) throw std::invalid_argument("EvolutionConfig: record_every must be >= 1");
}

namespace {

QuadraticState state_at(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, double t) {
  return QuadraticState{u, v, t};
}

}  // namespace

Trajectory evolve(const LinearSystem& sys, const QuadraticState& initial,
                  const EvolutionConfig& cfg, const std::optional<QuadraticState>& reference) {
  sys.validate();
  cfg.validate();
  const Eigen::Index n = sys.n();
  if (initial.u.size() != n || initial.du.size() != n) {
    throw DimensionError("evolve: initial state dimension mismatch");
  }
  if (reference && (reference->u.size() != n || reference->du.size() != n)) {
    throw DimensionError("evolve: reference state dimension mismatch");
  }

  const double h = cfg.dt;
  const auto steps = static_cast<long>(std::ceil(cfg.T / h - 1e-9));
  const cplx half_ih{0.0, 0.5 * h};

  const Eigen::MatrixXcd step_matrix = Eigen::MatrixXcd::Identity(n, n) + half_ih * sys.b +
                                       (0.25 * h * h) * sys.a_tilde;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(step_matrix);

  Trajectory traj;
  traj.shifts = cfg.s_list;
  traj.shifted_energy.assign(cfg.s_list.size(), {});
  traj.weight = sys.weight;
  traj.dt = h;
  traj.record_every = cfg.record_every;

  Eigen::VectorXcd u = initial.u, v = initial.du;
  Eigen::VectorXcd ru, rv;
  if (reference) {
    ru = reference->u;
    rv = reference->du;
  }

  // Returns false, leaving the trajectory untouched, if any diagnostic overflows.
  auto record = [&](double t) {
    const QuadraticState st = state_at(u, v, t);
    const double nrm = weighted_norm(u, sys.weight);
    const double e = energy(sys.a_tilde, st, sys.weight);
    std::vector<double> es(cfg.s_list.size());
    bool finite = std::isfinite(nrm) && std::isfinite(e);
    for (std::size_t k = 0; k < es.size(); ++k) {
      es[k] = shifted_energy(sys.a_tilde, sys.b, cfg.s_list[k], st, sys.weight);
      finite = finite && std::isfinite(es[k]);
    }
    cplx j{};
    if (reference) {
      j = current(sys.b, st, state_at(ru, rv, t), sys.weight);
      finite = finite && std::isfinite(j.real()) && std::isfinite(j.imag());
    }
    if (!finite) return false;
    traj.times.push_back(t);
    traj.norm.push_back(nrm);
    traj.energy.push_back(e);
    for (std::size_t k = 0; k < es.size(); ++k) traj.shifted_energy[k].push_back(es[k]);
    if (reference) traj.current.push_back(j);
    if (cfg.keep_states) {
      traj.u.push_back(u);
      traj.du.push_back(v);
    }
    return true;
  };

  auto advance = [&](Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    const Eigen::VectorXcd rhs = y - sys.a_tilde * (h * x + (0.25 * h * h) * y) - half_ih * (sys.b * y);
    Eigen::VectorXcd y_next = lu.solve(rhs);
    x += (0.5 * h) * (y + y_next);
    y = std::move(y_next);
  };

  if (!record(initial.t)) throw std::invalid_argument("evolve: initial diagnostics are not finite");
  for (long step = 1; step <= steps; ++step) {
    Eigen::VectorXcd u_prev = u, v_prev = v;
    advance(u, v);
    if (reference) advance(ru, rv);
    if (!u.allFinite() || !v.allFinite() || (reference && (!ru.allFinite() || !rv.allFinite()))) {
      u = std::move(u_prev);
      v = std::move(v_prev);
      traj.aborted = true;
      break;
    }
    if (step % cfg.record_every == 0 && !record(initial.t + static_cast<double>(step) * h)) {
      traj.aborted = true;
      break;
    }
  }
  return traj;
}

namespace {

double relative_drift(const std::vector<double>& series) {
  if (series.empty()) return 0.0;
  const double ref = series.front();
  double worst = 0.0;
  for (double x : series) worst = std::max(worst, std::abs(x - ref));
  return ref == 0.0 ? worst : worst / std::abs(ref);
}

}  // namespace

ConservationDrift conserved_series_check(const Trajectory& traj) {
  ConservationDrift out;
  out.max_rel_drift_E = relative_drift(traj.energy);
  for (const auto& series : traj.shifted_energy) {
    out.max_rel_drift_Es = std::max(out.max_rel_drift_Es, relative_drift(series));
  }
  if (!traj.current.empty()) {
    const cplx ref = traj.current.front();
    double worst = 0.0;
    for (cplx j : traj.current) worst = std::max(worst, std::abs(j - ref));
    out.max_drift_j = std::abs(ref) == 0.0 ? worst : worst / std::abs(ref);
  }
  return out;
}

double gronwall_bound(double gamma, double E, double norm_t1, double span) {
  if (!(span >= 0.0)) throw std::invalid_argument("gronwall_bound: span must be >= 0");
  if (!(norm_t1 >= 0.0)) throw std::invalid_argument("gronwall_bound: norm must be >= 0");
  if (gamma >= 0.0 && E < 0.0) {
    throw std::invalid_argument("gronwall_bound: E must be >= 0 when gamma >= 0");
  }
  if (gamma < 0.0) {
    return (norm_t1 + std::sqrt(std::abs(E)) * span) * std::exp(std::sqrt(-gamma) * span);
  }
  if (gamma == 0.0) return norm_t1 + std::sqrt(E) * span;
  const double decay = std::exp(-std::sqrt(gamma) * span);
  return std::sqrt(2.0 * E / gamma) * (1.0 - decay) + norm_t1 * decay;
}

bool certify_bounds(const Trajectory& traj, double gamma,
                    std::optional<std::size_t> shift_index) {
  const std::vector<double>* energies = &traj.energy;
  if (shift_index) {
    if (*shift_index >= traj.shifted_energy.size()) {
      throw std::out_of_range("certify_bounds: shift index out of range");
    }
    energies = &traj.shifted_energy[*shift_index];
  }
  const std::size_t count = traj.size();
  for (std::size_t i = 0; i < count; ++i) {
    double E = (*energies)[i];
    if (gamma >= 0.0 && E < 0.0) {
      // A valid lower bound gamma >= 0 forces E >= 0; allow roundoff only.
      const double scale = std::max(1.0, traj.norm[i] * traj.norm[i] * std::abs(gamma));
      if (E < -1e-12 * scale) return false;
      E = 0.0;
    }
    for (std::size_t j = i; j < count; ++j) {
      const double bound = gronwall_bound(gamma, E, traj.norm[i], traj.times[j] - traj.times[i]);
      if (traj.norm[j] > bound * (1.0 + 1e-9)) return false;
    }
  }
  return true;
}

double v_transform_residual(const LinearSystem& sys, const Trajectory& traj) {
  if (traj.size() < 3 || traj.u.size() != traj.size()) {
    throw std::invalid_argument("v_transform_residual: needs >= 3 stored snapshots");
  }
  if (traj.record_every != 1) {
    throw std::invalid_argument("v_transform_residual: needs record_every = 1");
  }
  const Eigen::Index n = sys.n();
  // Work in Euclidean coordinates x = W^{1/2} u, where both operators are Hermitian.
  Eigen::VectorXd root = Eigen::VectorXd::Ones(n);
  if (sys.weight.size() != 0) root = sys.weight.cwiseSqrt();
  const Eigen::MatrixXcd a_sym =
      root.cast<cplx>().asDiagonal() * sys.a_tilde * root.cwiseInverse().cast<cplx>().asDiagonal();
  Eigen::MatrixXcd b_sym =
      root.cast<cplx>().asDiagonal() * sys.b * root.cwiseInverse().cast<cplx>().asDiagonal();
  b_sym = 0.5 * (b_sym + b_sym.adjoint()).eval();
  const Eigen::MatrixXcd core = a_sym + 0.25 * b_sym * b_sym;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b_sym);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of B failed");
  const Eigen::MatrixXcd& basis = eig.eigenvectors();
  const Eigen::VectorXd beta = eig.eigenvalues();

  // exp(i t B/2) applied to x.
  auto rotate = [&](const Eigen::VectorXcd& x, double t) -> Eigen::VectorXcd {
    Eigen::VectorXcd c = basis.adjoint() * x;
    for (Eigen::Index k = 0; k < n; ++k) c(k) *= std::exp(cplx{0.0, 0.5 * t * beta(k)});
    return basis * c;
  };

  std::vector<Eigen::VectorXcd> v(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    v[k] = rotate(root.cast<cplx>().cwiseProduct(traj.u[k]), traj.times[k]);
  }
  const double h = traj.dt;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const Eigen::VectorXcd second = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
    // A(t) v = exp(i t B/2) (A~ + B^2/4) u.
    const Eigen::VectorXcd av = rotate(core * root.cast<cplx>().cwiseProduct(traj.u[k]), traj.times[k]);
    worst = std::max(worst, (second + av).norm());
  }
  return worst;
}

double growth_rate_estimate(const Trajectory& traj, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw std::invalid_argument("growth_rate_estimate: window_fraction must be in (0, 1]");
  }
  const std::size_t count = traj.size();
  const auto first = static_cast<std::size_t>(
      std::floor((1.0 - window_fraction) * static_cast<double>(count)));
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t used = 0;
  for (std::size_t k = first; k < count; ++k) {
    if (!(traj.norm[k] > 1e-300)) continue;
    const double t = traj.times[k];
    const double y = std::log(traj.norm[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++used;
  }
  if (used == 0) throw std::runtime_error("growth_rate_estimate: all norms below 1e-300");
  if (used < 2) throw std::runtime_error("growth_rate_estimate: window holds fewer than 2 records");
  const double nn = static_cast<double>(used);
  const double den = nn * stt - st * st;
  if (!(den > 0.0)) throw std::runtime_error("growth_rate_estimate: degenerate time window");
  const double slope = (nn * sty - st * sy) / den;
  return std::abs(slope) < kGrowthThreshold ? 0.0 : slope;
}

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,norm,E_u";
  for (double s : traj.shifts) out << ",E_s_u[s=" << shortest(s) << "]";
  const bool with_j = !traj.current.empty();
  if (with_j) out << ",j_re,j_im";
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]) << ',' << format_double(traj.norm[k]) << ','
        << format_double(traj.energy[k]);
    for (const auto& series : traj.shifted_energy) out << ',' << format_double(series[k]);
    if (with_j) {
      out << ',' << format_double(traj.current[k].real()) << ','
          << format_double(traj.current[k].imag());
    }
    out << '\n';
  }
}

}  // namespace kgk
