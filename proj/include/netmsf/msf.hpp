#pragma once

// Master stability function
//
//   sigma(lambda, mu) = max Re eig(F + lambda H + mu G)
//
// for a plant-network eigenvalue lambda and a feedback-network eigenvalue mu,
// plus the search for the stable mu-interval nearest the origin.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netmsf/errors.hpp"
#include "netmsf/io.hpp"
#include "netmsf/model.hpp"
#include "netmsf/parallel.hpp"

namespace netmsf {

using Complex = std::complex<double>;

/// Largest real part among the eigenvalues of a real square matrix.
inline double max_real_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalFailure("real eigensolver did not converge");
  return es.eigenvalues().real().maxCoeff();
}

inline double max_real_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalFailure("complex eigensolver did not converge");
  return es.eigenvalues().real().maxCoeff();
}

/// Mode block F + lambda H + mu G.
inline Eigen::MatrixXcd mode_block(const PlantModel& model, Complex lambda, Complex mu) {
  return model.F().cast<Complex>() + lambda * model.H().cast<Complex>() +
         mu * model.G().cast<Complex>();
}

inline double sigma(const PlantModel& model, Complex lambda, Complex mu) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()) ||
      !std::isfinite(mu.real()) || !std::isfinite(mu.imag())) {
    throw NumericalFailure("sigma evaluated at a non-finite point");
  }
  if (lambda.imag() == 0.0 && mu.imag() == 0.0) {
    const Eigen::MatrixXd block = model.F() + lambda.real() * model.H() + mu.real() * model.G();
    return max_real_eigenvalue(block);
  }
  return max_real_eigenvalue(mode_block(model, lambda, mu));
}

inline double sigma(const PlantModel& model, double lambda, double mu) {
  return sigma(model, Complex(lambda), Complex(mu));
}

struct MsfPoint {
  double lambda = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Coordinate k of `steps` evenly spaced samples spanning r (both ends exact).
inline double grid_coordinate(const io::Range& r, std::size_t k, std::size_t steps) {
  if (k + 1 == steps) return r.hi;
  return r.lo + (r.hi - r.lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
}

/// Row-major (lambda outer, mu inner) evaluation over a real rectangle.
inline std::vector<MsfPoint> sigma_grid(const PlantModel& model, const io::Range& lambda_range,
                                        const io::Range& mu_range, std::size_t lambda_steps,
                                        std::size_t mu_steps) {
  if (lambda_steps < 2 || mu_steps < 2) throw BadParameter("grid needs at least 2 steps per axis");
  if (!std::isfinite(lambda_range.lo) || !std::isfinite(lambda_range.hi) ||
      !std::isfinite(mu_range.lo) || !std::isfinite(mu_range.hi)) {
    throw BadParameter("grid ranges must be finite");
  }
  std::vector<MsfPoint> grid(lambda_steps * mu_steps);
  parallel_for(grid.size(), [&](std::size_t idx) {
    const std::size_t i = idx / mu_steps, j = idx % mu_steps;
    MsfPoint& p = grid[idx];
    p.lambda = grid_coordinate(lambda_range, i, lambda_steps);
    p.mu = grid_coordinate(mu_range, j, mu_steps);
    try {
      p.sigma = sigma(model, p.lambda, p.mu);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string(e.what()) + " at lambda=" + io::format_double(p.lambda) +
                             " mu=" + io::format_double(p.mu));
    }
  });
  return grid;
}

inline std::vector<MsfPoint> sigma_grid(const PlantModel& model, const io::Range& lambda_range,
                                        const io::Range& mu_range, std::size_t steps) {
  return sigma_grid(model, lambda_range, mu_range, steps, steps);
}

inline std::string format_grid_csv(const std::vector<MsfPoint>& grid) {
  std::string out = "lambda,mu,sigma\n";
  for (const auto& p : grid) {
    out += io::format_double(p.lambda) + ',' + io::format_double(p.mu) + ',' +
           io::format_double(p.sigma) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stable intervals on the real mu axis.

struct IntervalSearch {
  io::Range range{-50.0, 50.0};
  double tol = 1e-9;
  std::size_t scan_points = 400;
};

/// A maximal run of mu with sigma(lambda, mu) < 0. A side that reaches the
/// search range is "unbounded within range": its endpoint is the range end
/// and the matching `*_bounded` flag is false. Finite boundaries are the
/// stable side of the final bisection bracket.
struct StableInterval {
  Complex lambda;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_bounded = false;
  bool upper_bounded = false;
  bool empty = true;

  bool contains(double mu) const { return !empty && lower <= mu && mu <= upper; }
  double distance_to_origin() const {
    if (empty) return std::numeric_limits<double>::infinity();
    if (lower <= 0.0 && 0.0 <= upper) return 0.0;
    return std::min(std::abs(lower), std::abs(upper));
  }
};

namespace detail {

inline void check_search(const IntervalSearch& s) {
  if (!std::isfinite(s.range.lo) || !std::isfinite(s.range.hi) || !(s.range.lo < 0.0) ||
      !(s.range.hi > 0.0)) {
    throw BadParameter("search range must be finite with lower < 0 < upper");
  }
  if (!(s.tol > 0.0)) throw BadParameter("interval tolerance must be positive");
  if (s.scan_points < 2) throw BadParameter("scan needs at least 2 points");
}

/// Shrinks the bracket between an unstable and a stable mu to within tol and
/// returns the stable end.
inline double bisect_boundary(const PlantModel& model, Complex lambda, double unstable,
                              double stable, double tol) {
  while (std::abs(stable - unstable) > tol) {
    const double mid = 0.5 * (stable + unstable);
    if (mid == stable || mid == unstable) break;
    if (sigma(model, lambda, Complex(mid)) < 0.0)
      stable = mid;
    else
      unstable = mid;
  }
  return stable;
}

}  // namespace detail

/// Every maximal negative-sigma run detected by the scan, in ascending mu.
inline std::vector<StableInterval> stable_intervals(const PlantModel& model, Complex lambda,
                                                    const IntervalSearch& search = {}) {
  detail::check_search(search);
  std::vector<double> mus;
  mus.reserve(search.scan_points + 1);
  for (std::size_t k = 0; k < search.scan_points; ++k)
    mus.push_back(grid_coordinate(search.range, k, search.scan_points));
  // Always probe the origin itself.
  mus.insert(std::upper_bound(mus.begin(), mus.end(), 0.0), 0.0);
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());

  std::vector<char> stable(mus.size());
  for (std::size_t k = 0; k < mus.size(); ++k)
    stable[k] = sigma(model, lambda, Complex(mus[k])) < 0.0;

  std::vector<StableInterval> runs;
  for (std::size_t k = 0; k < mus.size();) {
    if (!stable[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < mus.size() && stable[end + 1]) ++end;
    StableInterval iv;
    iv.lambda = lambda;
    iv.empty = false;
    if (k == 0) {
      iv.lower = search.range.lo;
    } else {
      iv.lower = detail::bisect_boundary(model, lambda, mus[k - 1], mus[k], search.tol);
      iv.lower_bounded = true;
    }
    if (end + 1 == mus.size()) {
      iv.upper = search.range.hi;
    } else {
      iv.upper = detail::bisect_boundary(model, lambda, mus[end + 1], mus[end], search.tol);
      iv.upper_bounded = true;
    }
    runs.push_back(iv);
    k = end + 1;
  }
  return runs;
}

/// Nearest stable interval to mu = 0, or an empty interval when sigma >= 0 on
/// every scanned point. Ties prefer the interval on the negative side, then
/// the lower starting point.
inline StableInterval scan_stable_interval(const PlantModel& model, Complex lambda,
                                           const IntervalSearch& search = {}) {
  StableInterval best;
  best.lambda = lambda;
  for (const auto& iv : stable_intervals(model, lambda, search)) {
    if (best.empty) {
      best = iv;
      continue;
    }
    const double d = iv.distance_to_origin(), bd = best.distance_to_origin();
    if (d < bd) {
      best = iv;
    } else if (d == bd) {
      const bool neg = iv.upper <= 0.0, best_neg = best.upper <= 0.0;
      if ((neg && !best_neg) || (neg == best_neg && iv.lower < best.lower)) best = iv;
    }
  }
  return best;
}

inline StableInterval stable_interval(const PlantModel& model, Complex lambda,
                                      const IntervalSearch& search = {}) {
  StableInterval iv = scan_stable_interval(model, lambda, search);
  if (iv.empty) {
    throw NoStableInterval("sigma >= 0 for every mu in [" + io::format_double(search.range.lo) +
                           ", " + io::format_double(search.range.hi) + "] at lambda=" +
                           io::format_double(lambda.real()) +
                           (lambda.imag() != 0.0 ? "+" + io::format_double(lambda.imag()) + "i" : "") +
                           "; try enlarging the search range");
  }
  return iv;
}

inline std::string interval_csv_header() { return "lambda_re,lambda_im,f_l,f_u,bounded_l,bounded_u\n"; }

inline std::string format_interval_csv_row(const StableInterval& iv) {
  return io::format_double(iv.lambda.real()) + ',' + io::format_double(iv.lambda.imag()) + ',' +
         io::format_double(iv.lower) + ',' + io::format_double(iv.upper) + ',' +
         (iv.lower_bounded ? "1" : "0") + ',' + (iv.upper_bounded ? "1" : "0") + '\n';
}

}  // namespace netmsf
