#pragma once

// Feedback-network synthesis.
//
// Weighted: A = Q diag(mu) Q* in the plant network's own unitary basis, with
// each mode gain mu_i the smallest-magnitude point of that mode's stable
// interval. Because Q is unitary, ||A||_F^2 = sum_i |mu_i|^2, so minimising the
// Frobenius norm decouples into N scalar problems.
//
// Binary: exact branch and bound over 0/1 link patterns minimising the link
// count, with feasibility decided on the full closed-loop spectrum.
//
// Matching: A = B with L chosen so that R L cancels the plant coupling H.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netmsf/errors.hpp"
#include "netmsf/graphs.hpp"
#include "netmsf/io.hpp"
#include "netmsf/model.hpp"
#include "netmsf/msf.hpp"
#include "netmsf/parallel.hpp"
#include "netmsf/verify.hpp"

namespace netmsf {

enum class DesignMethod { Weighted, Binary, Matching };

inline const char* to_string(DesignMethod m) {
  switch (m) {
    case DesignMethod::Weighted: return "weighted";
    case DesignMethod::Binary: return "binary";
    case DesignMethod::Matching: return "matching";
  }
  return "unknown";
}

inline DesignMethod parse_design_method(std::string_view s) {
  if (s == "weighted") return DesignMethod::Weighted;
  if (s == "binary") return DesignMethod::Binary;
  if (s == "matching") return DesignMethod::Matching;
  throw ParseError("unknown design method '" + std::string(s) + "'");
}

struct DesignResult {
  DesignMethod method = DesignMethod::Weighted;
  Eigen::MatrixXd feedback;
  /// Plant-network eigenvalues in spectrum order and the paired feedback
  /// gains. For binary designs the gains are the Rayleigh quotients
  /// Re(q_i* A q_i), since A need not share the plant basis.
  std::vector<Complex> plant_eigenvalues;
  std::vector<double> mode_gains;
  std::vector<StableInterval> intervals;  // weighted only
  double frobenius_norm = 0.0;
  double trace = 0.0;
  double margin = 0.0;

  // Filled from the full closed-loop spectrum.
  bool verified = false;
  double max_real_part = 0.0;

  // Binary only.
  long link_count = 0;
  bool optimal = false;
  bool timed_out = false;
  std::uint64_t nodes_explored = 0;

  // Matching only: the inter-node gain actually used and its residual.
  Eigen::MatrixXd inter_node_gain;
  double matching_residual = 0.0;
  bool matching_exact = false;
};

namespace detail {

inline void finish_result(DesignResult& r, const PlantModel& model, const Eigen::MatrixXd& plant) {
  r.frobenius_norm = r.feedback.norm();
  r.trace = r.feedback.trace();
  const SpectralVerdict v = spectral_verdict(build_closed_loop(model, plant, r.feedback));
  r.verified = v.stable;
  r.max_real_part = v.max_real_part;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Weighted design.

struct WeightedOptions {
  IntervalSearch search;
  double margin = 0.01;
  /// Relative normality defect above which the plant network is rejected.
  double normality_tol = 1e-8;
};

/// Smallest-magnitude admissible gain: the point of the interval shrunk by
/// `margin` at each finite boundary that is closest to zero. Falls back to
/// the midpoint when the interval is narrower than twice the margin.
inline double choose_mode_gain(const StableInterval& iv, double margin) {
  const double lo = iv.lower + (iv.lower_bounded ? margin : 0.0);
  const double hi = iv.upper - (iv.upper_bounded ? margin : 0.0);
  if (lo > hi) return 0.5 * (iv.lower + iv.upper);
  return std::clamp(0.0, lo, hi);
}

inline DesignResult design_weighted(const PlantModel& model, const Network& plant,
                                    const WeightedOptions& opts = {}) {
  if (!(opts.margin > 0.0)) throw BadParameter("margin must be positive");
  const Eigen::MatrixXd& b = plant.adjacency();
  const double defect = normality_defect(b);
  if (!plant.symmetric() && defect > opts.normality_tol) {
    throw NonNormalNetwork("plant network is neither symmetric nor normal (relative defect " +
                           io::format_double(defect) + ")");
  }
  const SpectralDecomposition spec = spectrum(b);
  const Eigen::Index n = plant.size();

  DesignResult r;
  r.method = DesignMethod::Weighted;
  r.margin = opts.margin;
  r.plant_eigenvalues = spec.eigenvalues;
  r.intervals.resize(static_cast<std::size_t>(n));
  parallel_for(r.intervals.size(), [&](std::size_t i) {
    r.intervals[i] = scan_stable_interval(model, spec.eigenvalues[i], opts.search);
  });

  std::string missing;
  for (std::size_t i = 0; i < r.intervals.size(); ++i) {
    if (!r.intervals[i].empty) continue;
    const Complex l = spec.eigenvalues[i];
    missing += (missing.empty() ? "" : ", ") + std::string("#") + std::to_string(i + 1) +
               " lambda=" + io::format_double(l.real()) +
               (l.imag() != 0.0 ? (l.imag() > 0 ? "+" : "") + io::format_double(l.imag()) + "i" : "");
  }
  if (!missing.empty()) {
    throw Infeasible("no stable mu-interval in [" + io::format_double(opts.search.range.lo) + ", " +
                     io::format_double(opts.search.range.hi) + "] for mode(s) " + missing);
  }

  for (const auto& iv : r.intervals) r.mode_gains.push_back(choose_mode_gain(iv, opts.margin));

  double imag_residue = 0.0;
  r.feedback = assemble_from_modes(spec, r.mode_gains, &imag_residue);
  const double gain_scale =
      std::max(1.0, std::sqrt(std::inner_product(r.mode_gains.begin(), r.mode_gains.end(),
                                                 r.mode_gains.begin(), 0.0)));
  if (imag_residue > 1e-8 * gain_scale) {
    throw NumericalFailure("designed feedback has imaginary residue " + io::format_double(imag_residue));
  }
  if (plant.symmetric()) r.feedback = (0.5 * (r.feedback + r.feedback.transpose())).eval();
  detail::finish_result(r, model, b);
  return r;
}

// ---------------------------------------------------------------------------
// Binary design.

struct BinaryOptions {
  bool symmetric = true;
  double time_limit_seconds = 60.0;
  /// Upper bound on N * n for the full-spectrum feasibility test.
  Eigen::Index max_dimension = 256;
};

/// Off-diagonal positions in branching order: descending product of the
/// endpoints' eigenvector centralities, ties lexicographic. Only i < j when
/// symmetric.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> binary_branch_order(
    const Eigen::MatrixXd& plant, bool symmetric) {
  const Eigen::VectorXd c = eigenvector_centrality(plant);
  const Eigen::Index n = plant.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = symmetric ? i + 1 : 0; j < n; ++j)
      if (i != j) entries.emplace_back(i, j);
  // Products are snapped to a 1e-12 grid so rounding noise in the
  // eigenvector cannot reorder genuinely tied entries.
  const auto key = [&](const std::pair<Eigen::Index, Eigen::Index>& e) {
    return std::llround(c(e.first) * c(e.second) * 1e12);
  };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const auto& a, const auto& b) { return key(a) > key(b); });
  return entries;
}

namespace detail {

class BinarySearch {
 public:
  BinarySearch(const PlantModel& model, const Eigen::MatrixXd& plant, const BinaryOptions& opts)
      : model_(model),
        plant_(plant),
        opts_(opts),
        entries_(binary_branch_order(plant, opts.symmetric)),
        weight_(opts.symmetric ? 2 : 1),
        current_(Eigen::MatrixXd::Zero(plant.rows(), plant.cols())),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(opts.time_limit_seconds))) {}

  void run() {
    // Seed the incumbent with the full feedback graph when it is feasible.
    Eigen::MatrixXd full = Eigen::MatrixXd::Ones(plant_.rows(), plant_.cols());
    full.diagonal().setZero();
    if (feasible(full)) {
      best_ = full;
      best_links_ = static_cast<long>(full.sum());
    }
    branch(0, 0);
  }

  bool timed_out() const { return timed_out_; }
  const std::optional<Eigen::MatrixXd>& best() const { return best_; }
  long best_links() const { return best_links_; }
  std::uint64_t explored() const { return explored_; }

 private:
  bool feasible(const Eigen::MatrixXd& a) {
    return max_real_eigenvalue(build_closed_loop(model_, plant_, a).matrix) < 0.0;
  }

  void set(std::size_t e, double v) {
    const auto [i, j] = entries_[e];
    current_(i, j) = v;
    if (opts_.symmetric) current_(j, i) = v;
  }

  void consider_leaf(long links) {
    if (links < best_links_ && feasible(current_)) {
      best_ = current_;
      best_links_ = links;
    }
  }

  void branch(std::size_t depth, long links) {
    if (timed_out_) return;
    ++explored_;
    if ((explored_ & 63u) == 0 && std::chrono::steady_clock::now() > deadline_) {
      timed_out_ = true;
      return;
    }
    if (links >= best_links_) return;
    if (depth == entries_.size() || links + weight_ >= best_links_) {
      // Only the completion with every remaining entry at 0 can still improve.
      consider_leaf(links);
      return;
    }
    set(depth, 1.0);
    branch(depth + 1, links + weight_);
    set(depth, 0.0);
    branch(depth + 1, links);
  }

  const PlantModel& model_;
  const Eigen::MatrixXd& plant_;
  BinaryOptions opts_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries_;
  long weight_;
  Eigen::MatrixXd current_;
  std::chrono::steady_clock::time_point deadline_;
  std::optional<Eigen::MatrixXd> best_;
  long best_links_ = std::numeric_limits<long>::max();
  std::uint64_t explored_ = 0;
  bool timed_out_ = false;
};

}  // namespace detail

/// Minimum-link 0/1 feedback network. Throws Infeasible when no binary
/// pattern stabilises the network, TimedOut when the limit passes before any
/// feasible pattern is found. A timeout with an incumbent returns it with
/// `optimal == false`.
inline DesignResult design_binary(const PlantModel& model, const Network& plant,
                                  const BinaryOptions& opts = {}) {
  if (!(opts.time_limit_seconds > 0.0)) throw BadParameter("time limit must be positive");
  if (plant.size() * model.states() > opts.max_dimension) {
    throw BadParameter("N*n = " + std::to_string(plant.size() * model.states()) +
                       " exceeds the binary design limit " + std::to_string(opts.max_dimension));
  }
  detail::BinarySearch search(model, plant.adjacency(), opts);
  search.run();
  if (!search.best()) {
    if (search.timed_out()) {
      throw TimedOut("no feasible binary feedback found within " +
                     io::format_double(opts.time_limit_seconds) + " s");
    }
    throw Infeasible("no binary feedback network stabilises this plant network");
  }

  DesignResult r;
  r.method = DesignMethod::Binary;
  r.feedback = *search.best();
  r.link_count = search.best_links();
  r.timed_out = search.timed_out();
  r.optimal = !search.timed_out();
  r.nodes_explored = search.explored();
  const SpectralDecomposition spec = spectrum(plant.adjacency());
  r.plant_eigenvalues = spec.eigenvalues;
  const Eigen::MatrixXcd projected = spec.basis.adjoint() * r.feedback.cast<Complex>() * spec.basis;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) r.mode_gains.push_back(projected(i, i).real());
  detail::finish_result(r, model, plant.adjacency());
  return r;
}

// ---------------------------------------------------------------------------
// Matching baseline.

inline constexpr double kMatchingExactTol = 1e-9;

/// A = B with the inter-node gain L fitted by least squares to R L = -H, so
/// the feedback channel cancels the plant coupling link by link.
inline DesignResult design_matching(const PlantModel& model, const Network& plant) {
  const GainFit fit = fit_inter_node_gain(model, -model.H());
  const PlantModel matched = model.with_inter_node_gain(fit.gain);

  DesignResult r;
  r.method = DesignMethod::Matching;
  r.feedback = plant.adjacency();
  r.inter_node_gain = fit.gain;
  r.matching_residual = fit.residual;
  r.matching_exact = fit.residual <= kMatchingExactTol;
  const SpectralDecomposition spec = spectrum(plant.adjacency());
  r.plant_eigenvalues = spec.eigenvalues;
  for (const auto& l : spec.eigenvalues) r.mode_gains.push_back(l.real());
  detail::finish_result(r, matched, plant.adjacency());
  return r;
}

// ---------------------------------------------------------------------------
// Norm sweep over a network family.

struct SweepFamily {
  NetworkKind kind = NetworkKind::RingRegular;
  int degree = 4;
};

/// `ring:k` or `complete`.
inline SweepFamily parse_sweep_family(std::string_view text) {
  const std::string s = io::trim(text);
  if (s == "complete") return {NetworkKind::Complete, 0};
  const auto parts = io::split(s, ':');
  if (parts.size() == 2 && parts[0] == "ring") {
    return {NetworkKind::RingRegular, static_cast<int>(io::parse_int(parts[1], "ring degree"))};
  }
  throw ParseError("unrecognised sweep family '" + s + "' (expected ring:k or complete)");
}

struct SweepRow {
  Eigen::Index nodes = 0;
  std::optional<double> weighted_norm;  // empty when infeasible
  double matching_norm = 0.0;
  bool weighted_verified = false;
  std::string status = "ok";
};

inline std::vector<SweepRow> norm_sweep(const PlantModel& model, const SweepFamily& family,
                                        Eigen::Index n_min, Eigen::Index n_max,
                                        const WeightedOptions& opts = {}) {
  if (n_min < 2 || n_max < n_min) throw BadParameter("sweep needs 2 <= N_min <= N_max");
  std::vector<SweepRow> rows;
  for (Eigen::Index n = n_min; n <= n_max; ++n) {
    const Network plant = family.kind == NetworkKind::Complete
                              ? make_complete(n)
                              : make_ring(n, family.degree);
    SweepRow row;
    row.nodes = n;
    row.matching_norm = design_matching(model, plant).frobenius_norm;
    try {
      const DesignResult w = design_weighted(model, plant, opts);
      row.weighted_norm = w.frobenius_norm;
      row.weighted_verified = w.verified;
      if (!w.verified) row.status = "unverified";
    } catch (const Infeasible&) {
      row.status = "infeasible";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "N,weighted_norm,matching_norm,status\n";
  for (const auto& r : rows) {
    out += std::to_string(r.nodes) + ',' +
           (r.weighted_norm ? io::format_double(*r.weighted_norm) : std::string("nan")) + ',' +
           io::format_double(r.matching_norm) + ',' + r.status + '\n';
  }
  return out;
}

}  // namespace netmsf
