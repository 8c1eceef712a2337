#pragma once

// Independent checks on a designed network: the full closed-loop matrix
//
//   Ft = I_N (x) F + B (x) H + A (x) G,     x' = Ft x,
//
// its spectral stability verdict, the block-spectrum union identity for
// jointly triangularizable (A, B), and time-domain RK4 corroboration.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netmsf/errors.hpp"
#include "netmsf/graphs.hpp"
#include "netmsf/io.hpp"
#include "netmsf/model.hpp"
#include "netmsf/msf.hpp"

namespace netmsf {

struct ClosedLoopSystem {
  Eigen::MatrixXd matrix;  // (N n) x (N n)
  Eigen::Index nodes = 0;
  Eigen::Index states = 0;
};

/// Block (i, j) is [i == j] F + B(i, j) H + A(i, j) G.
inline ClosedLoopSystem build_closed_loop(const PlantModel& model, const Eigen::MatrixXd& plant,
                                          const Eigen::MatrixXd& feedback) {
  const Eigen::Index n_nodes = plant.rows();
  if (plant.cols() != n_nodes || n_nodes == 0) throw DimensionMismatch("plant network must be square");
  if (feedback.rows() != n_nodes || feedback.cols() != n_nodes) {
    throw DimensionMismatch("feedback network is " + std::to_string(feedback.rows()) + "x" +
                            std::to_string(feedback.cols()) + " but plant network is " +
                            std::to_string(n_nodes) + "x" + std::to_string(n_nodes));
  }
  const Eigen::Index n = model.states();
  ClosedLoopSystem sys{Eigen::MatrixXd::Zero(n_nodes * n, n_nodes * n), n_nodes, n};
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    for (Eigen::Index j = 0; j < n_nodes; ++j) {
      auto block = sys.matrix.block(i * n, j * n, n, n);
      if (i == j)
        block = model.F() + plant(i, j) * model.H() + feedback(i, j) * model.G();
      else
        block = plant(i, j) * model.H() + feedback(i, j) * model.G();
    }
  }
  return sys;
}

inline ClosedLoopSystem build_closed_loop(const PlantModel& model, const Network& plant,
                                          const Eigen::MatrixXd& feedback) {
  return build_closed_loop(model, plant.adjacency(), feedback);
}

struct SpectralVerdict {
  double max_real_part = 0.0;
  bool stable = false;
};

inline SpectralVerdict spectral_verdict(const ClosedLoopSystem& system) {
  const double m = max_real_eigenvalue(system.matrix);
  return {m, m < 0.0};
}

/// A = Re(Q diag(mu) Q*) for the plant network's own spectral basis.
/// `max_imaginary` receives the largest discarded imaginary residue.
inline Eigen::MatrixXd assemble_from_modes(const SpectralDecomposition& spec,
                                           const std::vector<double>& gains,
                                           double* max_imaginary = nullptr) {
  const auto n = spec.basis.rows();
  if (static_cast<Eigen::Index>(gains.size()) != n) {
    throw DimensionMismatch("expected " + std::to_string(n) + " mode gains, got " +
                            std::to_string(gains.size()));
  }
  Eigen::VectorXcd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = gains[static_cast<std::size_t>(i)];
  const Eigen::MatrixXcd a = spec.basis * mu.asDiagonal() * spec.basis.adjoint();
  if (max_imaginary) *max_imaginary = a.imag().cwiseAbs().maxCoeff();
  return a.real();
}

namespace detail {

/// Largest distance in a one-to-one pairing of two equal-size multisets,
/// built greedily from the globally closest remaining pair.
inline double greedy_matching_distance(const std::vector<std::complex<double>>& a,
                                       const std::vector<std::complex<double>>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("eigenvalue multisets differ in size");
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) pairs.emplace_back(std::abs(a[i] - b[j]), i, j);
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> used_a(a.size()), used_b(b.size());
  double worst = 0.0;
  std::size_t matched = 0;
  for (const auto& [d, i, j] : pairs) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = 1;
    worst = std::max(worst, d);
    if (++matched == a.size()) break;
  }
  return worst;
}

}  // namespace detail

/// Compares eig(Ft) with the union over modes of eig(F + lambda_i H + mu_i G),
/// where A = Q diag(mu) Q* shares the plant network's basis. Returns the
/// largest distance of the greedy nearest-pair matching.
inline double spectrum_union_check(const PlantModel& model, const Eigen::MatrixXd& plant,
                                   const std::vector<double>& mode_gains) {
  const SpectralDecomposition spec = spectrum(plant);
  const Eigen::MatrixXd feedback = assemble_from_modes(spec, mode_gains);
  const ClosedLoopSystem sys = build_closed_loop(model, plant, feedback);

  Eigen::EigenSolver<Eigen::MatrixXd> full(sys.matrix, false);
  if (full.info() != Eigen::Success) throw NumericalFailure("closed-loop eigensolver did not converge");
  std::vector<std::complex<double>> lhs(full.eigenvalues().begin(), full.eigenvalues().end());

  std::vector<std::complex<double>> rhs;
  rhs.reserve(lhs.size());
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        mode_block(model, spec.eigenvalues[i], Complex(mode_gains[i])), false);
    if (es.info() != Eigen::Success) throw NumericalFailure("mode-block eigensolver did not converge");
    rhs.insert(rhs.end(), es.eigenvalues().begin(), es.eigenvalues().end());
  }
  return detail::greedy_matching_distance(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Time-domain simulation.

struct SimState {
  double t = 0.0;
  Eigen::VectorXd x;
};

struct Trajectory {
  std::vector<SimState> samples;
  /// State norm exceeded the divergence threshold; integration stopped there.
  bool diverged = false;

  const SimState& final_state() const { return samples.back(); }
};

struct SimOptions {
  double t_end = 10.0;
  double dt = 1e-3;
  /// Keep every k-th step (the initial and final states are always kept).
  std::size_t sample_every = 1;
  double divergence_threshold = 1e12;
};

/// Default step 1e-3 / max(1, spectral radius of Ft).
inline double default_time_step(const ClosedLoopSystem& system) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(system.matrix, false);
  const double radius = es.info() == Eigen::Success ? es.eigenvalues().cwiseAbs().maxCoeff()
                                                    : system.matrix.lpNorm<Eigen::Infinity>();
  return 1e-3 / std::max(1.0, radius);
}

/// Classical fixed-step RK4 on x' = Ft x. The step is shrunk so the last step
/// lands on t_end exactly.
inline Trajectory simulate(const ClosedLoopSystem& system, const Eigen::VectorXd& x0,
                           const SimOptions& opts) {
  const Eigen::Index dim = system.matrix.rows();
  if (x0.size() != dim) {
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(dim));
  }
  if (!(opts.dt > 0.0)) throw BadParameter("time step must be positive");
  if (!(opts.t_end > opts.dt)) throw BadParameter("t_end must exceed the time step");
  if (!x0.allFinite()) throw BadParameter("initial state has non-finite entries");

  const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
  const double h = opts.t_end / static_cast<double>(steps);
  const std::size_t every = std::max<std::size_t>(1, opts.sample_every);
  const Eigen::MatrixXd& m = system.matrix;

  Trajectory traj;
  traj.samples.push_back({0.0, x0});
  Eigen::VectorXd x = x0, k1(dim), k2(dim), k3(dim), k4(dim);
  for (std::size_t s = 1; s <= steps; ++s) {
    k1.noalias() = m * x;
    k2.noalias() = m * (x + 0.5 * h * k1);
    k3.noalias() = m * (x + 0.5 * h * k2);
    k4.noalias() = m * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = s == steps ? opts.t_end : h * static_cast<double>(s);
    const double norm = x.norm();
    if (!std::isfinite(norm) || norm > opts.divergence_threshold) {
      traj.diverged = true;
      traj.samples.push_back({t, x});
      return traj;
    }
    if (s % every == 0 || s == steps) traj.samples.push_back({t, x});
  }
  return traj;
}

inline std::string format_trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  const auto dim = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  for (Eigen::Index i = 0; i < dim; ++i) out += ",x_" + std::to_string(i + 1);
  out += '\n';
  for (const auto& s : traj.samples) {
    out += io::format_double(s.t);
    for (Eigen::Index i = 0; i < s.x.size(); ++i) out += ',' + io::format_double(s.x(i));
    out += '\n';
  }
  return out;
}

}  // namespace netmsf
