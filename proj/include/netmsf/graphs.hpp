#pragma once

// Plant and feedback network adjacency matrices and their spectral
// decompositions.
//
// Orientation: entry (i, j) of an adjacency matrix is the link *from node j
// into node i*, i.e. row i collects everything node i receives. This is the
// orientation used when the matrix is placed in a Kronecker product with the
// local coupling matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netmsf/errors.hpp"
#include "netmsf/io.hpp"

namespace netmsf {

enum class NetworkKind { Complete, RingRegular, ErdosRenyi, Custom };

/// Generator description, also the parsed form of `complete:N`, `ring:N:k`,
/// `er:N:p:seed` and `file:PATH`.
struct NetworkSpec {
  NetworkKind kind = NetworkKind::Complete;
  Eigen::Index size = 0;
  int degree = 0;            // ring-regular only
  double probability = 0.0;  // erdos-renyi only
  std::uint64_t seed = 0;    // erdos-renyi only
  std::filesystem::path file;  // custom only
};

class Network {
 public:
  Network(Eigen::MatrixXd adjacency, NetworkSpec spec);

  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  Eigen::Index size() const { return adjacency_.rows(); }
  const NetworkSpec& spec() const { return spec_; }
  NetworkKind kind() const { return spec_.kind; }
  bool symmetric() const { return symmetric_; }
  bool zero_diagonal() const { return adjacency_.diagonal().isZero(0.0); }

  /// Weighted in-degree of each node (row sums).
  Eigen::VectorXd in_degrees() const { return adjacency_.rowwise().sum(); }
  /// Weighted out-degree of each node (column sums).
  Eigen::VectorXd out_degrees() const { return adjacency_.colwise().sum().transpose(); }

  std::string describe() const;

 private:
  Eigen::MatrixXd adjacency_;
  NetworkSpec spec_;
  bool symmetric_ = false;
};

inline Network::Network(Eigen::MatrixXd adjacency, NetworkSpec spec)
    : adjacency_(std::move(adjacency)), spec_(std::move(spec)) {
  if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() == 0) {
    throw DimensionMismatch("adjacency must be square and non-empty, got " +
                            std::to_string(adjacency_.rows()) + "x" +
                            std::to_string(adjacency_.cols()));
  }
  if (!adjacency_.allFinite()) throw BadParameter("adjacency has non-finite entries");
  spec_.size = adjacency_.rows();
  symmetric_ = (adjacency_ - adjacency_.transpose()).norm() == 0.0;
}

inline std::string Network::describe() const {
  switch (spec_.kind) {
    case NetworkKind::Complete: return "complete:" + std::to_string(size());
    case NetworkKind::RingRegular:
      return "ring:" + std::to_string(size()) + ":" + std::to_string(spec_.degree);
    case NetworkKind::ErdosRenyi:
      return "er:" + std::to_string(size()) + ":" + io::format_double(spec_.probability) + ":" +
             std::to_string(spec_.seed);
    case NetworkKind::Custom: break;
  }
  return spec_.file.empty() ? "custom:" + std::to_string(size()) : "file:" + spec_.file.string();
}

// ---------------------------------------------------------------------------
// CSV adjacency files: N rows of N comma-separated decimals, no header.

inline Eigen::MatrixXd parse_adjacency_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (const auto& raw : io::split(text, '\n')) {
    const std::string line = io::trim(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : io::split(line, ',')) row.push_back(io::parse_double(cell, "adjacency"));
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ParseError("adjacency CSV is empty");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw ParseError("adjacency CSV row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline std::string format_adjacency_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += io::format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators.

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline Network make_network(const NetworkSpec& spec, double coupling = 1.0) {
  if (spec.kind == NetworkKind::Custom) {
    NetworkSpec s = spec;
    return Network(coupling * parse_adjacency_csv(io::read_file(spec.file)), s);
  }
  const Eigen::Index n = spec.size;
  if (n < 2) throw BadParameter("network size must be at least 2, got " + std::to_string(n));
  if (!std::isfinite(coupling)) throw BadParameter("coupling must be finite");

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  switch (spec.kind) {
    case NetworkKind::Complete:
      adj.setOnes();
      adj.diagonal().setZero();
      break;
    case NetworkKind::RingRegular: {
      const int k = spec.degree;
      if (k <= 0 || k % 2 != 0) {
        throw BadParameter("ring degree k must be positive and even, got " + std::to_string(k));
      }
      if (k >= n) {
        throw BadParameter("ring degree k must be below N, got k=" + std::to_string(k) +
                           " N=" + std::to_string(n));
      }
      for (Eigen::Index i = 0; i < n; ++i)
        for (int off = 1; off <= k / 2; ++off) {
          adj(i, (i + off) % n) = 1.0;
          adj(i, (i - off + n) % n) = 1.0;
        }
      break;
    }
    case NetworkKind::ErdosRenyi: {
      const double p = spec.probability;
      if (!(p >= 0.0 && p <= 1.0)) {
        throw BadParameter("edge probability must lie in [0, 1], got " + io::format_double(p));
      }
      std::mt19937_64 rng(spec.seed);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
          if (detail::unit_uniform(rng) < p) adj(i, j) = adj(j, i) = 1.0;
      break;
    }
    case NetworkKind::Custom: break;
  }
  return Network(coupling * adj, spec);
}

inline Network make_complete(Eigen::Index n, double coupling = 1.0) {
  return make_network({.kind = NetworkKind::Complete, .size = n}, coupling);
}

inline Network make_ring(Eigen::Index n, int k, double coupling = 1.0) {
  return make_network({.kind = NetworkKind::RingRegular, .size = n, .degree = k}, coupling);
}

inline Network make_erdos_renyi(Eigen::Index n, double p, std::uint64_t seed, double coupling = 1.0) {
  return make_network(
      {.kind = NetworkKind::ErdosRenyi, .size = n, .probability = p, .seed = seed}, coupling);
}

inline Network make_custom(Eigen::MatrixXd adjacency) {
  return Network(std::move(adjacency), {.kind = NetworkKind::Custom});
}

/// Parses `complete:N`, `ring:N:k`, `er:N:p:seed` or `file:PATH`.
inline NetworkSpec parse_network_spec(std::string_view text) {
  const std::string s = io::trim(text);
  if (s.rfind("file:", 0) == 0) {
    if (s.size() == 5) throw ParseError("file: network needs a path");
    return {.kind = NetworkKind::Custom, .file = s.substr(5)};
  }
  const auto parts = io::split(s, ':');
  const auto size_of = [&](const std::string& t) {
    return static_cast<Eigen::Index>(io::parse_int(t, "network size"));
  };
  if (parts[0] == "complete" && parts.size() == 2) {
    return {.kind = NetworkKind::Complete, .size = size_of(parts[1])};
  }
  if (parts[0] == "ring" && parts.size() == 3) {
    return {.kind = NetworkKind::RingRegular,
            .size = size_of(parts[1]),
            .degree = static_cast<int>(io::parse_int(parts[2], "ring degree"))};
  }
  if (parts[0] == "er" && parts.size() == 4) {
    const long seed = io::parse_int(parts[3], "seed");
    if (seed < 0) throw ParseError("seed must be non-negative");
    return {.kind = NetworkKind::ErdosRenyi,
            .size = size_of(parts[1]),
            .probability = io::parse_double(parts[2], "edge probability"),
            .seed = static_cast<std::uint64_t>(seed)};
  }
  throw ParseError("unrecognised network '" + s +
                   "' (expected complete:N, ring:N:k, er:N:p:seed or file:PATH)");
}

// ---------------------------------------------------------------------------
// Spectral decomposition  adjacency = Q T Q*.

struct SpectralDecomposition {
  /// Diagonal of `triangular`, sorted by descending real part, ties by
  /// descending imaginary part.
  std::vector<std::complex<double>> eigenvalues;
  Eigen::MatrixXcd basis;       // unitary Q
  Eigen::MatrixXcd triangular;  // upper-triangular T
};

namespace detail {

inline bool precedes(std::complex<double> a, std::complex<double> b, double tie_tol) {
  if (std::abs(a.real() - b.real()) > tie_tol) return a.real() > b.real();
  return a.imag() > b.imag() + tie_tol;
}

/// Swaps diagonal entries k and k+1 of the complex Schur form T, updating Q
/// so that Q T Q* is unchanged.
inline void swap_schur_pair(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q, Eigen::Index k) {
  using C = std::complex<double>;
  const C t11 = T(k, k), t12 = T(k, k + 1), t22 = T(k + 1, k + 1);
  // First column of the rotation is the eigenvector of the 2x2 block for t22.
  Eigen::Vector2cd v(t12, t22 - t11);
  const double nv = v.norm();
  if (nv == 0.0) return;
  v /= nv;
  Eigen::Matrix2cd Z;
  Z << v(0), -std::conj(v(1)), v(1), std::conj(v(0));

  T.middleRows(k, 2) = (Z.adjoint() * T.middleRows(k, 2)).eval();
  T.middleCols(k, 2) = (T.middleCols(k, 2) * Z).eval();
  Q.middleCols(k, 2) = (Q.middleCols(k, 2) * Z).eval();
  T(k + 1, k) = C(0.0);
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
}

}  // namespace detail

/// Symmetric input takes the real symmetric eigensolver path (T exactly
/// diagonal, Q real orthogonal); everything else gets a reordered complex
/// Schur form.
inline SpectralDecomposition spectrum(const Eigen::MatrixXd& adjacency) {
  const Eigen::Index n = adjacency.rows();
  if (n == 0 || adjacency.cols() != n) throw DimensionMismatch("spectrum needs a square matrix");
  SpectralDecomposition out;

  if ((adjacency - adjacency.transpose()).norm() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency);
    if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver did not converge");
    // Ascending from Eigen; reverse into descending order.
    const Eigen::VectorXd vals = es.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
    out.basis = vecs.cast<std::complex<double>>();
    out.triangular = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.triangular(i, i) = vals(i);
      out.eigenvalues.emplace_back(vals(i), 0.0);
    }
    return out;
  }

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(adjacency.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw NumericalFailure("complex Schur did not converge");
  Eigen::MatrixXcd T = schur.matrixT();
  Eigen::MatrixXcd Q = schur.matrixU();
  const double tie_tol = 1e-12 * std::max(1.0, adjacency.norm());
  // Bubble sort by adjacent swaps; N is small.
  for (Eigen::Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      if (detail::precedes(T(k + 1, k + 1), T(k, k), tie_tol)) {
        detail::swap_schur_pair(T, Q, k);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
  out.triangular = T.triangularView<Eigen::Upper>();
  out.basis = std::move(Q);
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues.push_back(out.triangular(i, i));
  return out;
}

inline SpectralDecomposition spectrum(const Network& network) { return spectrum(network.adjacency()); }

/// Normality defect ||A A^T - A^T A||_F relative to ||A||_F^2 (0 for the zero matrix).
inline double normality_defect(const Eigen::MatrixXd& a) {
  const double scale = a.squaredNorm();
  if (scale == 0.0) return 0.0;
  return (a * a.transpose() - a.transpose() * a).norm() / scale;
}

/// Absolute entries of the eigenvector belonging to the eigenvalue of largest
/// real part, normalised to unit 2-norm.
inline Eigen::VectorXd eigenvector_centrality(const Eigen::MatrixXd& adjacency) {
  const Eigen::Index n = adjacency.rows();
  Eigen::VectorXd c;
  if ((adjacency - adjacency.transpose()).norm() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency);
    c = es.eigenvectors().col(n - 1).cwiseAbs();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(adjacency);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    c = es.eigenvectors().col(best).cwiseAbs();
  }
  const double norm = c.norm();
  return norm > 0.0 ? Eigen::VectorXd(c / norm) : Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
}

}  // namespace netmsf
