#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cdm/csv.hpp"
#include "cdm/simulation/campaign.hpp"
#include "cdm/stats/bootstrap.hpp"

namespace cdm::sim {

struct MetricsCell {
  std::string algorithm;
  std::size_t size = 0;
  std::size_t replicas = 0;  // pooled over treatments
  stats::Interval accuracy;
  stats::Interval best_member_accuracy;
  stats::Interval terminal_regret;
  stats::Interval mean_regret;
  std::vector<stats::Interval> regret;           // per round
  std::vector<stats::Interval> win_pct;          // per member rank, best first
  std::vector<stats::Interval> structure_share;  // ExpertiseTree only
};

struct MetricRow {
  std::string algorithm;
  std::string treatment;
  std::size_t size = 0;
  std::string metric;
  std::optional<std::size_t> round;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct MetricsTable {
  std::string treatment = "all";
  std::size_t headlines_per_round = 1;
  std::vector<MetricsCell> cells;  // algorithm-major, then size

  const MetricsCell& cell(const std::string& algorithm, std::size_t size) const {
    for (const auto& c : cells)
      if (c.algorithm == algorithm && c.size == size) return c;
    throw ValidationError("no metrics for " + algorithm + " at N=" + std::to_string(size));
  }

  std::vector<MetricRow> rows() const {
    std::vector<MetricRow> out;
    for (const auto& c : cells) {
      auto add = [&](const std::string& metric, std::optional<std::size_t> round,
                     const stats::Interval& v) {
        out.push_back({c.algorithm, treatment, c.size, metric, round, v.mean, v.lo, v.hi});
      };
      add("accuracy", std::nullopt, c.accuracy);
      add("best_member_accuracy", std::nullopt, c.best_member_accuracy);
      add("terminal_regret", std::nullopt, c.terminal_regret);
      add("mean_regret", std::nullopt, c.mean_regret);
      for (std::size_t t = 0; t < c.regret.size(); ++t) add("regret", t + 1, c.regret[t]);
      // same curve indexed by headlines revealed so far
      for (std::size_t t = 0; t < c.regret.size(); ++t)
        add("regret_headlines", (t + 1) * headlines_per_round, c.regret[t]);
      for (std::size_t q = 0; q < c.win_pct.size(); ++q) add("win_pct", q + 1, c.win_pct[q]);
      for (std::size_t s = 0; s < c.structure_share.size(); ++s)
        add("structure_share", s, c.structure_share[s]);
    }
    return out;
  }

  void write_csv(std::ostream& out) const {
    csv::Writer w(out);
    w.row("algorithm", "treatment", "N", "metric", "round", "value", "ci_lo", "ci_hi");
    for (const auto& r : rows())
      w.row(r.algorithm, r.treatment, r.size, r.metric,
            r.round ? std::to_string(*r.round) : std::string(), r.value, r.ci_lo, r.ci_hi);
  }
};

inline std::string treatment_label(const SimulationConfig& cfg, const std::vector<int>& used) {
  if (cfg.treatments.empty()) return "all";
  std::string s;
  for (int t : used) s += (s.empty() ? "" : "+") + std::to_string(t);
  return s;
}

// Pools treatments and replicas per (algorithm, N) and attaches bootstrap
// intervals. Every interval draws from its own seed, so the reduction is
// independent of evaluation order.
inline MetricsTable compute_metrics(const CampaignResult& res) {
  const SimulationConfig& cfg = res.config;
  MetricsTable table;
  table.treatment = treatment_label(cfg, res.treatments);
  table.headlines_per_round = res.headlines_per_round;
  const std::size_t n_alg = cfg.algorithms.size(), n_size = cfg.sizes.size();
  table.cells.resize(n_alg * n_size);

  parallel_for(table.cells.size(), cfg.workers, [&](std::size_t idx) {
    const std::size_t a = idx / n_size, s = idx % n_size;
    const std::string& label = cfg.algorithms[a].label;
    std::vector<const ReplicaSummary*> pool;
    for (std::size_t t = 0; t < res.treatments.size(); ++t)
      for (std::size_t r = 0; r < cfg.replicas; ++r) pool.push_back(&res.summaries[res.item(t, s, r)][a]);

    auto ci = [&](const std::string& metric, std::size_t round, auto&& get, bool curve) {
      std::vector<double> v;
      v.reserve(pool.size());
      for (const auto* p : pool) v.push_back(get(*p));
      stats::BootstrapOptions o = cfg.ci;
      if (curve) o.resamples = cfg.curve_resamples;
      Rng rng(mix_seed({cfg.seed, hash_string("metrics"), hash_string(label), cfg.sizes[s],
                        hash_string(metric), round}));
      return stats::bootstrap_ci(v, rng, o);
    };

    MetricsCell& c = table.cells[idx];
    c.algorithm = label;
    c.size = cfg.sizes[s];
    c.replicas = pool.size();
    c.accuracy = ci("accuracy", 0, [](const ReplicaSummary& p) { return p.accuracy(); }, false);
    c.best_member_accuracy =
        ci("best_member_accuracy", 0, [](const ReplicaSummary& p) { return p.best_accuracy(); }, false);
    c.terminal_regret =
        ci("terminal_regret", 0, [](const ReplicaSummary& p) { return p.terminal_regret(); }, false);
    c.mean_regret = ci("mean_regret", 0, [](const ReplicaSummary& p) { return p.mean_regret(); }, false);
    const std::size_t rounds = pool.front()->rounds();
    for (std::size_t t = 0; t < rounds; ++t)
      c.regret.push_back(ci("regret", t, [t](const ReplicaSummary& p) { return p.regret2[t] / 2.0; }, true));
    for (std::size_t q = 0; q < pool.front()->wins.size(); ++q)
      c.win_pct.push_back(ci("win_pct", q, [q](const ReplicaSummary& p) { return double(p.wins[q]); }, true));
    if (pool.front()->structure >= 0) {
      for (int k = 0; k < kNumTreeStructures; ++k)
        c.structure_share.push_back(ci("structure_share", static_cast<std::size_t>(k),
                                       [k](const ReplicaSummary& p) { return p.structure == k ? 1.0 : 0.0; },
                                       true));
    }
  });
  return table;
}

// Fraction of replicas in which `algorithm` beats the member at each rank,
// one row per group size.
inline std::vector<std::vector<double>> win_percentage(const CampaignResult& res,
                                                       const std::string& algorithm) {
  const auto& algs = res.config.algorithms;
  std::size_t a = algs.size();
  for (std::size_t i = 0; i < algs.size(); ++i)
    if (algs[i].label == algorithm) a = i;
  if (a == algs.size()) throw ValidationError("unknown algorithm '" + algorithm + "'");
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < res.config.sizes.size(); ++s) {
    std::vector<double> row(res.config.sizes[s], 0.0);
    double count = 0.0;
    for (std::size_t t = 0; t < res.treatments.size(); ++t)
      for (std::size_t r = 0; r < res.config.replicas; ++r) {
        const auto& w = res.summaries[res.item(t, s, r)][a].wins;
        for (std::size_t q = 0; q < w.size(); ++q) row[q] += w[q];
        count += 1.0;
      }
    for (double& v : row) v /= count;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace cdm::sim
