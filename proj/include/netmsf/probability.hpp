#pragma once

// Monte Carlo estimate of the probability that a random Erdos-Renyi plant
// network admits a feasible, verified feedback design.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "netmsf/design.hpp"
#include "netmsf/errors.hpp"
#include "netmsf/graphs.hpp"
#include "netmsf/io.hpp"
#include "netmsf/model.hpp"
#include "netmsf/parallel.hpp"

namespace netmsf {

/// `er:N:p` family (the seed comes separately).
struct RandomFamily {
  Eigen::Index nodes = 0;
  double probability = 0.0;
};

inline RandomFamily parse_random_family(std::string_view text) {
  const std::string s = io::trim(text);
  const auto parts = io::split(s, ':');
  if (parts.size() != 3 || parts[0] != "er") {
    throw ParseError("unrecognised random family '" + s + "' (expected er:N:p)");
  }
  return {static_cast<Eigen::Index>(io::parse_int(parts[1], "network size")),
          io::parse_double(parts[2], "edge probability")};
}

struct ProbabilityOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  DesignMethod method = DesignMethod::Weighted;
  WeightedOptions weighted;
  BinaryOptions binary;
};

struct ProbabilityEstimate {
  double probability = 0.0;  // edge probability of the family
  std::size_t trials = 0;
  std::size_t successes = 0;
  double fraction = 0.0;
  double ci_low = 0.0;   // 95% normal approximation, clamped to [0, 1]
  double ci_high = 0.0;
};

/// Trial t samples er:N:p with seed `seed + t`. A trial succeeds when the
/// designer returns a design whose closed loop is spectrally stable; any
/// designer error counts as a failure.
inline ProbabilityEstimate stability_probability(const PlantModel& model, const RandomFamily& family,
                                                 const ProbabilityOptions& opts) {
  if (opts.trials < 1) throw BadParameter("trials must be at least 1");
  std::vector<char> ok(opts.trials, 0);
  parallel_for(opts.trials, [&](std::size_t t) {
    const Network plant = make_erdos_renyi(family.nodes, family.probability, opts.seed + t);
    try {
      DesignResult r;
      switch (opts.method) {
        case DesignMethod::Weighted: r = design_weighted(model, plant, opts.weighted); break;
        case DesignMethod::Binary: r = design_binary(model, plant, opts.binary); break;
        case DesignMethod::Matching: r = design_matching(model, plant); break;
      }
      ok[t] = r.verified ? 1 : 0;
    } catch (const BadParameter&) {
      throw;
    } catch (const Error&) {
      ok[t] = 0;
    }
  });

  ProbabilityEstimate est;
  est.probability = family.probability;
  est.trials = opts.trials;
  for (char c : ok) est.successes += static_cast<std::size_t>(c);
  est.fraction = static_cast<double>(est.successes) / static_cast<double>(est.trials);
  const double half =
      1.96 * std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(est.trials));
  est.ci_low = std::max(0.0, est.fraction - half);
  est.ci_high = std::min(1.0, est.fraction + half);
  return est;
}

inline std::string format_probability_csv(const ProbabilityEstimate& e) {
  return "p,trials,stable_fraction,ci_low,ci_high\n" + io::format_double(e.probability) + ',' +
         std::to_string(e.trials) + ',' + io::format_double(e.fraction) + ',' +
         io::format_double(e.ci_low) + ',' + io::format_double(e.ci_high) + '\n';
}

}  // namespace netmsf
