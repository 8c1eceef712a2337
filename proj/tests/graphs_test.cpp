#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "netmsf/graphs.hpp"
#include "oracles.hpp"

namespace netmsf {
namespace {

void expect_decomposition_invariants(const Eigen::MatrixXd& a, const SpectralDecomposition& s) {
  const auto n = a.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  EXPECT_LE((s.basis * s.basis.adjoint() - I).norm(), 1e-10 * n);
  const double scale = std::max(1.0, a.norm());
  EXPECT_LE((s.basis * s.triangular * s.basis.adjoint() - a.cast<std::complex<double>>()).norm(),
            1e-8 * scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    EXPECT_EQ(s.triangular(i, i), s.eigenvalues[i]);
    for (Eigen::Index j = 0; j < i; ++j) EXPECT_EQ(s.triangular(i, j), std::complex<double>(0.0));
  }
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i)
    EXPECT_GE(s.eigenvalues[i - 1].real(), s.eigenvalues[i].real() - 1e-9);
}

TEST(MakeNetwork, CompleteIsAllOnesOffDiagonal) {
  const Network net = make_complete(8);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Ones(8, 8);
  expected.diagonal().setZero();
  EXPECT_EQ(net.adjacency(), expected);
  EXPECT_TRUE(net.symmetric());
  EXPECT_TRUE(net.zero_diagonal());
  EXPECT_EQ(net.in_degrees(), Eigen::VectorXd::Constant(8, 7.0));
  EXPECT_EQ(net.describe(), "complete:8");
}

TEST(MakeNetwork, CouplingScalesEntries) {
  EXPECT_EQ(make_complete(4, 0.5).adjacency(), 0.5 * make_complete(4).adjacency());
}

TEST(MakeNetwork, FourRegularRingOnFiveNodesIsComplete) {
  EXPECT_EQ(make_ring(5, 4).adjacency(), make_complete(5).adjacency());
}

TEST(MakeNetwork, RingHasRegularDegree) {
  const Network ring = make_ring(10, 4);
  EXPECT_EQ(ring.in_degrees(), Eigen::VectorXd::Constant(10, 4.0));
  EXPECT_EQ(ring.adjacency()(0, 1), 1.0);
  EXPECT_EQ(ring.adjacency()(0, 2), 1.0);
  EXPECT_EQ(ring.adjacency()(0, 3), 0.0);
  EXPECT_EQ(ring.adjacency()(0, 9), 1.0);
}

TEST(MakeNetwork, ErdosRenyiEdgeCases) {
  EXPECT_TRUE(make_erdos_renyi(4, 0.0, 123).adjacency().isZero(0.0));
  EXPECT_EQ(make_erdos_renyi(5, 1.0, 9).adjacency(), make_complete(5).adjacency());
  const Network a = make_erdos_renyi(12, 0.4, 42), b = make_erdos_renyi(12, 0.4, 42);
  EXPECT_EQ(a.adjacency(), b.adjacency());
  EXPECT_TRUE(a.symmetric());
  EXPECT_TRUE(a.zero_diagonal());
  EXPECT_NE(make_erdos_renyi(12, 0.4, 43).adjacency(), a.adjacency());
}

TEST(MakeNetwork, RejectsBadParameters) {
  EXPECT_THROW(make_ring(8, 3), BadParameter);
  EXPECT_THROW(make_ring(4, 4), BadParameter);
  EXPECT_THROW(make_ring(6, 0), BadParameter);
  EXPECT_THROW(make_erdos_renyi(4, 1.5, 1), BadParameter);
  EXPECT_THROW(make_erdos_renyi(4, -0.1, 1), BadParameter);
  EXPECT_THROW(make_complete(1), BadParameter);
}

TEST(NetworkSpecGrammar, ParsesAllKinds) {
  const auto c = parse_network_spec("complete:8");
  EXPECT_EQ(c.kind, NetworkKind::Complete);
  EXPECT_EQ(c.size, 8);
  const auto r = parse_network_spec("ring:6:4");
  EXPECT_EQ(r.kind, NetworkKind::RingRegular);
  EXPECT_EQ(r.degree, 4);
  const auto e = parse_network_spec("er:10:0.25:7");
  EXPECT_EQ(e.kind, NetworkKind::ErdosRenyi);
  EXPECT_EQ(e.probability, 0.25);
  EXPECT_EQ(e.seed, 7u);
  EXPECT_EQ(parse_network_spec("file:/tmp/a.csv").file, "/tmp/a.csv");
  EXPECT_THROW(parse_network_spec("star:5"), ParseError);
  EXPECT_THROW(parse_network_spec("ring:6"), ParseError);
  EXPECT_THROW(parse_network_spec("er:6:0.5"), ParseError);
  EXPECT_THROW(parse_network_spec("complete:x"), ParseError);
}

TEST(AdjacencyCsv, RoundTripsThroughFile) {
  const auto path = std::filesystem::temp_directory_path() / "netmsf_graphs_test.csv";
  const Eigen::MatrixXd m = make_erdos_renyi(7, 0.5, 3, 0.3).adjacency();
  io::write_atomic(path, format_adjacency_csv(m));
  const Network loaded = make_network(parse_network_spec("file:" + path.string()));
  EXPECT_EQ(loaded.adjacency(), m);
  EXPECT_EQ(loaded.kind(), NetworkKind::Custom);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_adjacency_csv("0,1\n1\n"), ParseError);
  EXPECT_THROW(parse_adjacency_csv("0,1,1\n1,0,1\n"), ParseError);
  EXPECT_THROW(parse_adjacency_csv(""), ParseError);
}

TEST(Spectrum, CompleteGraph) {
  // K_8: A 1 = 7 * 1, and A + I = J has rank one, so -1 has multiplicity 7.
  const SpectralDecomposition s = spectrum(make_complete(8));
  ASSERT_EQ(s.eigenvalues.size(), 8u);
  EXPECT_NEAR(s.eigenvalues[0].real(), 7.0, 1e-12);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_NEAR(s.eigenvalues[i].real(), -1.0, 1e-12);
  for (const auto& l : s.eigenvalues) EXPECT_EQ(l.imag(), 0.0);
  expect_decomposition_invariants(make_complete(8).adjacency(), s);
}

TEST(Spectrum, CompleteGraphFamily) {
  for (int n = 2; n <= 20; ++n) {
    const SpectralDecomposition s = spectrum(make_complete(n));
    EXPECT_NEAR(s.eigenvalues[0].real(), n - 1.0, 1e-9);
    for (int i = 1; i < n; ++i) EXPECT_NEAR(s.eigenvalues[i].real(), -1.0, 1e-9);
  }
}

TEST(Spectrum, RingMatchesCirculantFormula) {
  for (int n : {5, 8, 13, 30}) {
    auto expected = oracle::ring_eigenvalues(n, 4);
    std::sort(expected.rbegin(), expected.rend());
    const SpectralDecomposition s = spectrum(make_ring(n, 4));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(s.eigenvalues[i].real(), expected[i], 1e-10) << n;
  }
  // N = 8 explicitly: {4, sqrt2, sqrt2, 0, -sqrt2, -sqrt2, -2, -2}.
  const SpectralDecomposition s = spectrum(make_ring(8, 4));
  EXPECT_NEAR(s.eigenvalues[0].real(), 4.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[1].real(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.eigenvalues[3].real(), 0.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[7].real(), -2.0, 1e-12);
}

TEST(Spectrum, ZeroMatrix) {
  const SpectralDecomposition s = spectrum(Eigen::MatrixXd::Zero(3, 3));
  for (const auto& l : s.eigenvalues) EXPECT_EQ(l, std::complex<double>(0.0));
  expect_decomposition_invariants(Eigen::MatrixXd::Zero(3, 3), s);
}

TEST(Spectrum, RandomSymmetricReconstructionAndFrobeniusIdentity) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 11;
    const Eigen::MatrixXd a = oracle::random_symmetric(rng, n);
    const SpectralDecomposition s = spectrum(a);
    expect_decomposition_invariants(a, s);
    EXPECT_LE((s.basis * s.triangular * s.basis.adjoint() - a.cast<std::complex<double>>()).norm() /
                  a.norm(),
              1e-8);
    double sum = 0.0;
    for (const auto& l : s.eigenvalues) {
      EXPECT_LE(std::abs(l.imag()), 1e-10);
      sum += std::norm(l);
    }
    EXPECT_NEAR(a.squaredNorm(), sum, 1e-8 * a.squaredNorm());
    const Eigen::MatrixXcd off = s.triangular - Eigen::MatrixXcd(s.triangular.diagonal().asDiagonal());
    EXPECT_LE(off.norm(), 1e-10);
  }
}

TEST(Spectrum, NonSymmetricSchurIsSortedAndReconstructs) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    const Eigen::MatrixXd a = oracle::random_matrix(rng, n, n);
    const SpectralDecomposition s = spectrum(a);
    expect_decomposition_invariants(a, s);
    // Same multiset as an unrelated eigensolver.
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    std::vector<std::complex<double>> ref(es.eigenvalues().begin(), es.eigenvalues().end());
    for (const auto& l : s.eigenvalues) {
      const auto it = std::min_element(ref.begin(), ref.end(), [&](auto x, auto y) {
        return std::abs(x - l) < std::abs(y - l);
      });
      EXPECT_LE(std::abs(*it - l), 1e-8);
      ref.erase(it);
    }
  }
}

TEST(Spectrum, DirectedRingGivesComplexPairsWithImaginaryTieBreak) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) a(i, (i + 1) % 4) = 1.0;  // eigenvalues 1, i, -1, -i
  const SpectralDecomposition s = spectrum(a);
  EXPECT_NEAR(s.eigenvalues[0].real(), 1.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[1].imag(), 1.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[2].imag(), -1.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues[3].real(), -1.0, 1e-12);
  expect_decomposition_invariants(a, s);
}

TEST(EigenvectorCentrality, UniformOnRegularGraphs) {
  const Eigen::VectorXd c = eigenvector_centrality(make_ring(9, 4).adjacency());
  EXPECT_TRUE(c.isApprox(Eigen::VectorXd::Constant(9, 1.0 / 3.0), 1e-12));
}

TEST(NormalityDefect, SymmetricAndCirculantAreNormal) {
  EXPECT_EQ(normality_defect(make_complete(5).adjacency()), 0.0);
  Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) dir(i, (i + 1) % 4) = 1.0;
  EXPECT_EQ(normality_defect(dir), 0.0);
  Eigen::MatrixXd path = Eigen::MatrixXd::Zero(3, 3);
  path(0, 1) = path(1, 2) = 1.0;
  EXPECT_GT(normality_defect(path), 0.1);
}

}  // namespace
}  // namespace netmsf
