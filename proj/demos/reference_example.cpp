// Walks through the two-state example plant: MSF at a few points, the
// weighted and matching designs on a complete 8-node network, and a short
// ring sweep.

#include <cstdio>

#include "netmsf/netmsf.hpp"

int main() {
  using namespace netmsf;
  const PlantModel model = parse_plant_model(
      "D = 3 5; -1 0\n"
      "R = 1; 0\n"
      "H = 1 0; 0 0\n"
      "K = -5 0\n"
      "L = -1 0\n");

  std::printf("sigma(0, 0) = %.6f\n", sigma(model, 0.0, 0.0));
  std::printf("sigma(7, 5) = %.6f\n", sigma(model, 7.0, 5.0));

  const Network complete = make_complete(8);
  const DesignResult weighted = design_weighted(model, complete);
  const DesignResult matching = design_matching(model, complete);
  std::printf("complete N=8: weighted ||A||_F = %.6f (verified: %s), matching ||A||_F = %.6f\n",
              weighted.frobenius_norm, weighted.verified ? "yes" : "no", matching.frobenius_norm);
  std::printf("  weighted A(0,0) = %.6f, A(0,1) = %.6f\n", weighted.feedback(0, 0),
              weighted.feedback(0, 1));

  for (const auto& row : norm_sweep(model, {NetworkKind::RingRegular, 4}, 5, 12)) {
    std::printf("ring N=%2ld: weighted %.4f  matching %.4f\n", static_cast<long>(row.nodes),
                row.weighted_norm.value_or(-1.0), row.matching_norm);
  }
  return 0;
}
