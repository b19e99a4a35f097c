// Simulates the five-link tree, estimates every link with the exact MLE and
// prints the 95% confidence half-widths from the Fisher information.

#include <iomanip>
#include <iostream>

#include "nctomo/nctomo.hpp"

int main() {
  using namespace nctomo;
  const Configuration cfg = builtin_tree5().configuration();
  const auto code = CodeAssignment::xor_mode(cfg.topology.edge_count());
  const LossModel model{{0.8, 0.8, 0.9, 0.8, 0.8}};
  const std::size_t n = 5000;

  const OutcomeHistogram h = run_experiments(cfg, code, model, n, /*seed=*/7);
  const EstimateReport est = mle_tree(cfg, h);
  const FisherResult fisher = fisher_matrix(cfg, code, model);
  const auto ci = confidence_interval(fisher.inverse, static_cast<double>(n), 0.05);

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "edge  alpha  estimate  +/-95%\n";
  for (std::size_t e = 0; e < est.size(); ++e)
    std::cout << std::setw(4) << est.edge_ids[e] << "  " << model.alpha[e] << "  " << est.alpha[e] << "    "
              << ci.halfwidth[e] << '\n';
}
