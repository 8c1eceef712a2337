// Acceptance suite: one line per criterion, non-zero exit if any fails.
//
// Every tolerance and time budget below is fixed; nothing is calibrated at
// run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "netmsf/netmsf.hpp"
#include "oracles.hpp"

namespace {

using namespace netmsf;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PlantModel example_model() { return load_plant_model(NETMSF_PAPER_CFG); }

Outcome ac1_msf_oracle() {
  const PlantModel m = example_model();
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double l = u(rng), mu = u(rng);
    worst = std::max(worst, std::abs(sigma(m, l, mu) - oracle::routh_sigma(l, mu)));
  }
  const std::size_t steps = 101;
  const double cell = 20.0 / (steps - 1);
  const auto grid = sigma_grid(m, {-10, 10}, {-10, 10}, steps);
  double worst_level = 0.0;
  std::size_t crossings = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j + 1 < steps; ++j) {
      const auto& a = grid[i * steps + j];
      const auto& b = grid[i * steps + j + 1];
      if ((a.sigma < 0.0) != (b.sigma < 0.0)) {
        ++crossings;
        // The zero-level point is located at the midpoint of the bracketing pair.
        const double boundary = oracle::routh_boundary_mu(a.lambda);
        worst_level = std::max(worst_level, std::abs(0.5 * (a.mu + b.mu) - boundary));
      }
    }
  }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double boundary = oracle::routh_boundary_mu(grid[i * steps].lambda);
    if (boundary >= -10.0 && boundary < 10.0) ++expected;
  }
  const bool pass = worst <= 1e-8 && worst_level <= cell && crossings == expected;
  return {pass, "max |sigma - oracle| = " + fmt("%.3e", worst) + " (tol 1e-8), " +
                    std::to_string(crossings) + "/" + std::to_string(expected) + " grid crossings, max offset from mu = lambda - 2 = " +
                    fmt("%.4f", worst_level) + " (cell " + fmt("%.2f", cell) + ")"};
}

Outcome ac2_matching() {
  const DesignResult r = design_matching(example_model(), make_complete(8));
  const double err = std::abs(r.frobenius_norm - std::sqrt(56.0));
  const bool pass = err <= 1e-9 && std::abs(r.frobenius_norm - 7.4833) < 5e-5;
  return {pass, "||A||_F = " + fmt("%.10f", r.frobenius_norm) + ", |err| = " + fmt("%.1e", err) + " (tol 1e-9)"};
}

Outcome ac3_weighted_complete() {
  const PlantModel m = example_model();
  const DesignResult r = design_weighted(m, make_complete(8), {.margin = 0.01});
  int nonzero = 0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < r.mode_gains.size(); ++i)
    if (r.mode_gains[i] != 0.0) {
      ++nonzero;
      idx = i;
    }
  const bool paired = nonzero == 1 && std::abs(r.plant_eigenvalues[idx] - Complex(7.0)) <= 1e-9;
  const double gain = nonzero == 1 ? r.mode_gains[idx] : std::nan("");
  const bool pass = paired && std::abs(gain - 5.01) <= 1e-6 && std::abs(r.frobenius_norm - 5.01) <= 1e-6 &&
                    r.verified && r.max_real_part <= -1e-4;
  return {pass, std::to_string(nonzero) + " nonzero gain(s), mu(lambda=7) = " + fmt("%.9f", gain) +
                    ", ||A||_F = " + fmt("%.9f", r.frobenius_norm) + ", max Re eig = " +
                    fmt("%.6f", r.max_real_part) + ", entry A(0,1) = " + fmt("%.6f", r.feedback(0, 1)) +
                    " vs 62/99 = " + fmt("%.6f", 62.0 / 99.0)};
}

Outcome ac4_ring_sweep() {
  const auto rows = norm_sweep(example_model(), {NetworkKind::RingRegular, 4}, 5, 50);
  int violations = 0;
  double n8 = std::nan("");
  double worst_ratio = 0.0;
  for (const auto& row : rows) {
    const double matching = 2.0 * std::sqrt(double(row.nodes));
    if (!row.weighted_norm || !(*row.weighted_norm < row.matching_norm) ||
        std::abs(row.matching_norm - matching) > 1e-9) {
      ++violations;
      continue;
    }
    worst_ratio = std::max(worst_ratio, *row.weighted_norm / row.matching_norm);
    if (row.nodes == 8) n8 = *row.weighted_norm;
  }
  const bool pass = rows.size() == 46 && violations == 0 && std::abs(n8 - 2.01) <= 1e-6;
  return {pass, std::to_string(rows.size()) + " rows, " + std::to_string(violations) +
                    " violations, max weighted/matching = " + fmt("%.4f", worst_ratio) +
                    ", weighted(N=8) = " + fmt("%.9f", n8)};
}

Outcome ac5_spectrum_union() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index nodes = 2 + t % 7;  // 2..8
    const Eigen::Index n = 1 + t % 3;     // 1..3
    const PlantModel m = build_plant_model(
        oracle::random_matrix(rng, n, n), oracle::random_matrix(rng, n, 1), oracle::random_matrix(rng, n, n),
        oracle::random_matrix(rng, 1, n), oracle::random_matrix(rng, 1, n));
    const Eigen::MatrixXd b = oracle::random_symmetric(rng, nodes);
    std::vector<double> gains;
    for (Eigen::Index i = 0; i < nodes; ++i) gains.push_back(u(rng));
    worst = std::max(worst, spectrum_union_check(m, b, gains));
  }
  return {worst <= 1e-7, "50 instances, max deviation = " + fmt("%.3e", worst) + " (tol 1e-7)"};
}

Outcome ac6_binary_vs_exhaustive() {
  const PlantModel m = example_model();
  int compared = 0, feasible = 0, mismatches = 0, unverified = 0;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const Network b = make_erdos_renyi(4, 0.7, 1000 + seed, 1.0 + 0.2 * static_cast<double>(seed % 6));
    const auto ref = oracle::exhaustive_symmetric_binary(m.F(), m.H(), m.G(), b.adjacency());
    ++compared;
    if (!ref.feasible) {
      try {
        design_binary(m, b);
        ++mismatches;
      } catch (const Infeasible&) {
      }
      continue;
    }
    ++feasible;
    const DesignResult r = design_binary(m, b, {.symmetric = true});
    if (r.link_count != ref.links || !r.optimal) ++mismatches;
    if (!(r.max_real_part < 0.0)) ++unverified;
  }
  const bool pass = feasible >= 10 && mismatches == 0 && unverified == 0;
  return {pass, std::to_string(compared) + " instances (" + std::to_string(feasible) + " feasible), " +
                    std::to_string(mismatches) + " mismatches, " + std::to_string(unverified) +
                    " unverified designs"};
}

Outcome ac7_simulation_concordance() {
  const PlantModel m = example_model();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coupling(0.3, 1.5);
  int stable = 0, unstable = 0, disagreements = 0, attempts = 0;
  while (stable + unstable < 50 && attempts < 1000) {
    ++attempts;
    const Eigen::Index nodes = 3 + attempts % 4;
    const Network b = make_erdos_renyi(nodes, 0.6, 5000 + attempts, coupling(rng));
    const Eigen::MatrixXd a = oracle::random_symmetric(rng, nodes, 1.2);
    const ClosedLoopSystem sys = build_closed_loop(m, b, a);
    const SpectralVerdict v = spectral_verdict(sys);
    // Skip near-marginal instances whose decay or growth horizon is impractical.
    if (v.max_real_part > -0.05 && v.max_real_part <= 0.1) continue;
    Eigen::VectorXd x0(sys.matrix.rows());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = 2.0 * detail::unit_uniform(rng) - 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.matrix, false);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    const double horizon = 20.0 / std::abs(v.max_real_part);
    const Trajectory traj =
        simulate(sys, x0, {.t_end = horizon, .dt = 0.01 / std::max(1.0, radius), .sample_every = 1u << 30});
    const double final_norm = traj.final_state().x.norm();
    if (v.stable) {
      ++stable;
      if (traj.diverged || !(final_norm < 1e-2 * x0.norm())) ++disagreements;
    } else {
      ++unstable;
      if (!(traj.diverged || final_norm > x0.norm())) ++disagreements;
    }
  }
  const bool pass = stable + unstable == 50 && disagreements == 0 && stable > 0 && unstable > 0;
  return {pass, std::to_string(stable) + " stable + " + std::to_string(unstable) + " unstable instances, " +
                    std::to_string(disagreements) + " disagreements"};
}

Outcome ac8_determinism() {
  const fs::path dir = fs::temp_directory_path() / "netmsf_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = NETMSF_CLI_PATH;
  const std::string model = std::string(" --model ") + NETMSF_PAPER_CFG;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"grid.csv", "msf grid" + model + " --lambda -10:10 --mu -10:10 --steps 41 --out "},
      {"weighted.csv", "design weighted" + model + " --network er:10:0.5:3 --out "},
      {"binary.csv", "design binary" + model + " --network ring:6:4 --symmetric --out "},
      {"sweep.csv", "sweep norm" + model + " --family ring:4 --n 5:15 --out "},
      {"prob.csv", "prob stability" + model + " --family er:8:0.5 --trials 50 --seed 11 --out "},
  };
  int differing = 0, failed = 0;
  for (const auto& [name, args] : runs) {
    std::string contents[2], manifests[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (std::to_string(k) + name);
      // Same flag set both times: write to a fixed name, then move aside.
      const fs::path fixed = dir / name;
      const std::string cmd = cli + " " + args + fixed.string() + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) ++failed;
      contents[k] = fs::exists(fixed) ? io::read_file(fixed) : "";
      manifests[k] = fs::exists(fixed.string() + ".manifest") ? io::read_file(fixed.string() + ".manifest") : "";
      fs::rename(fixed, out);
    }
    if (contents[0].empty() || contents[0] != contents[1] || manifests[0] != manifests[1]) ++differing;
  }
  fs::remove_all(dir);
  return {differing == 0 && failed == 0, std::to_string(runs.size()) + " commands run twice, " +
                                             std::to_string(differing) + " differing outputs, " +
                                             std::to_string(failed) + " failed runs"};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "MSF oracle equivalence and zero-level set", 5.0, ac1_msf_oracle},
      {"AC2", "Matching baseline, complete N=8", 1.0, ac2_matching},
      {"AC3", "Weighted design, complete N=8, margin 0.01", 5.0, ac3_weighted_complete},
      {"AC4", "Ring k=4 sweep N=5..50", 60.0, ac4_ring_sweep},
      {"AC5", "Spectrum-union identity, 50 random instances", 30.0, ac5_spectrum_union},
      {"AC6", "Binary branch and bound vs exhaustive, N=4", 60.0, ac6_binary_vs_exhaustive},
      {"AC7", "Verdict/simulation concordance, 50 instances", 60.0, ac7_simulation_concordance},
      {"AC8", "CLI determinism", 120.0, ac8_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %s %s: %s; %.3f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
