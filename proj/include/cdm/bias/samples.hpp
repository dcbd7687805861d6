#pragma once

#include <string>
#include <vector>

#include "cdm/aggregators/registry.hpp"
#include "cdm/dataset.hpp"
#include "cdm/simulation/campaign.hpp"

namespace cdm::bias {

// Probability values observed per headline (indexed like
// Dataset::headlines()): raw mapped responses, or an aggregator's truth
// predictions collected over simulated replicas.
struct HeadlineSamples {
  std::string source = "raw";
  std::vector<std::vector<double>> values;

  double mean(std::size_t h) const {
    const auto& v = values.at(h);
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  }
};

inline HeadlineSamples raw_samples(const Dataset& d) {
  HeadlineSamples s;
  s.values.resize(d.headlines().size());
  for (const ResponseRecord& r : d.responses()) s.values[r.headline].push_back(map_response(r.raw_level));
  return s;
}

struct PredictionProtocol {
  std::size_t group_size = 36;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Label-mode replays of `spec`; each headline collects the prediction made
// for it before its feedback was revealed, once per replica of its treatment.
inline HeadlineSamples prediction_samples(const Dataset& d, const AlgorithmSpec& spec,
                                          const PredictionProtocol& proto) {
  sim::SimulationConfig cfg;
  cfg.sizes = {proto.group_size};
  cfg.replicas = proto.replicas;
  cfg.seed = proto.seed;
  cfg.algorithms = {spec};
  cfg.workers = proto.workers;
  cfg.validate(d);

  const auto treatments = d.treatments();
  std::vector<TreatmentView> views;
  for (int t : treatments) views.emplace_back(d, t);
  // [item] -> (global headline, prediction) pairs
  std::vector<std::vector<std::pair<std::size_t, double>>> found(treatments.size() * proto.replicas);
  sim::ReplicaOptions opt;
  opt.keep_trace = true;
  sim::parallel_for(found.size(), proto.workers, [&](std::size_t i) {
    const std::size_t t = i / proto.replicas, rep = i % proto.replicas;
    const sim::SeedTuple seeds{proto.seed, treatments[t], proto.group_size, rep};
    const auto group = sim::sample_group(views[t], cfg, seeds);
    const auto r = sim::run_algorithm(views[t], group, spec, seeds, opt);
    for (const auto& e : r.trace)
      for (std::size_t a = 0; a < e.arms.size(); ++a)
        if (e.arms[a].claims_genuine)
          found[i].emplace_back(views[t].headlines()[e.arms[a].headline], e.predictions.at(a));
  });
  HeadlineSamples s;
  s.source = spec.label;
  s.values.resize(d.headlines().size());
  for (const auto& item : found)
    for (const auto& [h, p] : item) s.values[h].push_back(p);
  return s;
}

}  // namespace cdm::bias
