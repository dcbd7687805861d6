#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdm/aggregators/registry.hpp"
#include "cdm/csv.hpp"
#include "cdm/dataset.hpp"
#include "cdm/simulation/parallel.hpp"
#include "cdm/simulation/replica.hpp"
#include "cdm/stats/bootstrap.hpp"

namespace cdm::sim {

inline std::vector<std::size_t> default_group_sizes() {
  std::vector<std::size_t> s;
  for (std::size_t n = 2; n <= 36; n += 2) s.push_back(n);
  return s;
}

inline std::vector<AlgorithmSpec> default_algorithms() {
  std::vector<AlgorithmSpec> out;
  for (const char* n : {"random", "cwmv", "exp4", "metacmab", "etree"})
    out.push_back(AlgorithmSpec::named(n));
  return out;
}

struct SimulationConfig {
  std::vector<std::size_t> sizes = default_group_sizes();
  std::size_t replicas = 1000;
  std::vector<int> treatments;  // empty = every treatment in the dataset
  EvaluationMode mode = EvaluationMode::kLabel;
  std::size_t arms = 2;                 // headline-selection mode only
  std::optional<std::size_t> horizon;   // rounds; default = one pass over the treatment
  std::uint64_t seed = 0;
  std::vector<AlgorithmSpec> algorithms = default_algorithms();
  MemberScore member_score = MemberScore::kBinary;
  std::size_t workers = 1;  // 0 = hardware concurrency
  stats::BootstrapOptions ci;
  std::size_t curve_resamples = 200;  // for per-round and per-rank metrics
  std::optional<std::filesystem::path> trace_dir;

  std::vector<int> resolved_treatments(const Dataset& d) const {
    return treatments.empty() ? d.treatments() : treatments;
  }

  void validate(const Dataset& d) const {
    if (sizes.empty()) throw ValidationError("simulation: no group sizes");
    if (replicas < 1) throw ValidationError("simulation: replicas must be >= 1");
    if (algorithms.empty()) throw ValidationError("simulation: no algorithms");
    std::set<std::string> labels;
    for (const auto& a : algorithms)
      if (!labels.insert(a.label).second)
        throw ValidationError("simulation: duplicate algorithm label '" + a.label + "'");
    const auto all = d.treatments();
    for (int t : resolved_treatments(d)) {
      if (std::find(all.begin(), all.end(), t) == all.end())
        throw ValidationError("simulation: treatment " + std::to_string(t) + " not in dataset");
      const std::size_t avail = d.participants_in(t).size();
      const std::size_t heads = d.headlines_in(t).size();
      for (std::size_t n : sizes) {
        if (n < 1) throw ValidationError("simulation: group size must be >= 1");
        if (n > avail)
          throw ValidationError("simulation: group size " + std::to_string(n) + " exceeds the " +
                                std::to_string(avail) + " participants of treatment " +
                                std::to_string(t));
      }
      if (mode == EvaluationMode::kHeadlineSelection && (arms < 2 || heads % arms != 0))
        throw ValidationError("simulation: arms per round (" + std::to_string(arms) +
                              ") must be >= 2 and divide " + std::to_string(heads));
    }
    if (horizon && *horizon < 1) throw ValidationError("simulation: horizon must be >= 1");
    if (ci.resamples < 1 || ci.sample_size < 1 || curve_resamples < 1)
      throw ValidationError("simulation: bootstrap sizes must be >= 1");
  }
};

// Identifies one replica well enough to replay it.
struct SeedTuple {
  std::uint64_t master = 0;
  int treatment = 0;
  std::size_t size = 0;
  std::size_t replica = 0;

  std::uint64_t group_seed() const {
    return mix_seed({master, static_cast<std::uint64_t>(treatment), size, replica});
  }
  std::uint64_t algorithm_seed(const std::string& label) const {
    return mix_seed({master, static_cast<std::uint64_t>(treatment), size, replica,
                     hash_string(label)});
  }
  std::string describe() const {
    return "seed=" + std::to_string(master) + " treatment=" + std::to_string(treatment) +
           " N=" + std::to_string(size) + " replica=" + std::to_string(replica);
  }
};

class CampaignError : public std::runtime_error {
 public:
  CampaignError(SeedTuple s, const std::string& algorithm, const std::string& what)
      : std::runtime_error("replica failed (" + s.describe() + " algorithm=" + algorithm +
                           "): " + what),
        seeds_(s) {}
  const SeedTuple& seeds() const { return seeds_; }

 private:
  SeedTuple seeds_;
};

// Compact per-(replica, algorithm) outcome kept for metric reduction.
// Rewards are multiples of 0.5, so doubled values are exact integers.
struct ReplicaSummary {
  std::int16_t total2 = 0;
  std::int16_t best_total2 = 0;
  std::vector<std::int8_t> regret2;  // 2 R_t
  std::vector<std::uint8_t> wins;    // per member rank, best first
  std::int8_t structure = -1;        // ExpertiseTree final structure

  std::size_t rounds() const { return regret2.size(); }
  double accuracy() const { return total2 / (2.0 * static_cast<double>(rounds())); }
  double best_accuracy() const { return best_total2 / (2.0 * static_cast<double>(rounds())); }
  double terminal_regret() const { return regret2.back() / 2.0; }
  double mean_regret() const {
    long s = 0;
    for (auto r : regret2) s += r;
    return static_cast<double>(s) / (2.0 * static_cast<double>(rounds()));
  }
};

inline ReplicaSummary summarize(const ReplicaResult& r) {
  ReplicaSummary s;
  s.total2 = static_cast<std::int16_t>(std::lround(2.0 * r.total()));
  s.best_total2 = static_cast<std::int16_t>(std::lround(2.0 * r.best_total()));
  for (std::size_t t = 0; t < r.rounds(); ++t)
    s.regret2.push_back(static_cast<std::int8_t>(std::lround(2.0 * r.regret(t))));
  for (std::size_t q = 0; q < r.member_ranking.size(); ++q) s.wins.push_back(r.beats(q) ? 1 : 0);
  if (r.final_structure) s.structure = static_cast<std::int8_t>(*r.final_structure);
  return s;
}

struct CampaignResult {
  SimulationConfig config;
  std::vector<int> treatments;
  std::size_t headlines_per_round = 1;
  // [item][algorithm]; item = (treatment_index * sizes + size_index) * replicas + replica
  std::vector<std::vector<ReplicaSummary>> summaries;

  std::size_t item(std::size_t t, std::size_t s, std::size_t r) const {
    return (t * config.sizes.size() + s) * config.replicas + r;
  }
  std::size_t replica_count() const { return summaries.size() * config.algorithms.size(); }
};

inline void write_trace(const std::filesystem::path& path, const ReplicaResult& r,
                        const TreatmentView& view) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  csv::Writer w(out);
  w.row("round", "arm", "headline", "claims_genuine", "score", "prediction", "chosen", "reward",
        "best_reward");
  for (const TraceEntry& e : r.trace) {
    for (std::size_t a = 0; a < e.arms.size(); ++a) {
      w.row(e.round + 1, a, view.headlines()[e.arms[a].headline], e.arms[a].claims_genuine ? 1 : 0,
            e.scores.at(a), e.predictions.at(a), e.chosen == a ? 1 : 0, e.reward, e.best_reward);
    }
  }
}

// Draws the group and round plan for one seed tuple.
inline GroupRounds sample_group(const TreatmentView& view, const SimulationConfig& cfg,
                                const SeedTuple& seeds) {
  Rng rng(seeds.group_seed());
  auto members = rng.sample_without_replacement(view.num_participants(), seeds.size);
  std::sort(members.begin(), members.end());
  RoundPlan plan = build_rounds(view, cfg.mode, cfg.arms, rng);
  if (cfg.horizon && *cfg.horizon < plan.rounds.size()) plan.rounds.resize(*cfg.horizon);
  return prepare_group(view, std::move(members), std::move(plan));
}

inline ReplicaResult run_algorithm(const TreatmentView& view, const GroupRounds& group,
                                   const AlgorithmSpec& spec, const SeedTuple& seeds,
                                   const ReplicaOptions& opt) {
  DynamicAggregator algo(make_aggregator(spec, group.members.size(), group.plan.arms(),
                                         group.plan.rounds.size()));
  Rng rng(seeds.algorithm_seed(spec.label));
  return run_replica(view, group, algo, rng, opt);
}

// Every (treatment, size, replica) cell, all algorithms sharing the sampled
// group. Output does not depend on the worker count.
inline CampaignResult run_campaign(const SimulationConfig& cfg, const Dataset& data) {
  cfg.validate(data);
  CampaignResult res;
  res.config = cfg;
  res.treatments = cfg.resolved_treatments(data);
  std::vector<TreatmentView> views;
  for (int t : res.treatments) views.emplace_back(data, t);
  res.headlines_per_round = cfg.mode == EvaluationMode::kLabel ? 1 : cfg.arms;
  if (cfg.trace_dir) std::filesystem::create_directories(*cfg.trace_dir);

  const std::size_t n_items = res.treatments.size() * cfg.sizes.size() * cfg.replicas;
  res.summaries.resize(n_items);
  ReplicaOptions opt;
  opt.member_score = cfg.member_score;
  opt.keep_trace = cfg.trace_dir.has_value();

  parallel_for(n_items, cfg.workers, [&](std::size_t i) {
    const std::size_t rep = i % cfg.replicas;
    const std::size_t s = (i / cfg.replicas) % cfg.sizes.size();
    const std::size_t t = i / (cfg.replicas * cfg.sizes.size());
    const SeedTuple seeds{cfg.seed, res.treatments[t], cfg.sizes[s], rep};
    const TreatmentView& view = views[t];
    std::string current = "<group>";
    try {
      const GroupRounds group = sample_group(view, cfg, seeds);
      auto& out = res.summaries[i];
      out.reserve(cfg.algorithms.size());
      for (const AlgorithmSpec& spec : cfg.algorithms) {
        current = spec.label;
        const ReplicaResult r = run_algorithm(view, group, spec, seeds, opt);
        if (cfg.trace_dir) {
          write_trace(*cfg.trace_dir / (spec.label + "_t" + std::to_string(seeds.treatment) + "_n" +
                                        std::to_string(seeds.size) + "_r" +
                                        std::to_string(seeds.replica) + ".csv"),
                      r, view);
        }
        out.push_back(summarize(r));
      }
    } catch (const std::exception& e) {
      throw CampaignError(seeds, current, e.what());
    }
  });
  return res;
}

}  // namespace cdm::sim
