// Small end-to-end run: synthetic data, a short campaign, one bias analysis.
#include <iostream>

#include "cdm/cdm.hpp"

int main() {
  using namespace cdm;
  const Dataset data = synth::generate(synth::heterogeneous_preset(7)).dataset;

  sim::SimulationConfig cfg;
  cfg.sizes = {4, 12};
  cfg.replicas = 20;
  cfg.seed = 7;
  cfg.algorithms = {AlgorithmSpec::named("cwmv"), AlgorithmSpec::named("metacmab"),
                    AlgorithmSpec::named("etree")};
  const auto metrics = sim::compute_metrics(sim::run_campaign(cfg, data));
  for (const auto& c : metrics.cells)
    std::cout << c.algorithm << " N=" << c.size << " accuracy " << c.accuracy.mean << " regret "
              << c.terminal_regret.mean << '\n';

  const auto framing = bias::framing_analysis(data, bias::raw_samples(data));
  std::cout << "framing fraction " << framing.framing_fraction() << '\n';
}
