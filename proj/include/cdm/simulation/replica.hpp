#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <cstdint>
#include <optional>
#include <vector>

#include "cdm/aggregators/decision.hpp"
#include "cdm/aggregators/expertise_tree.hpp"
#include "cdm/simulation/rounds.hpp"

namespace cdm::sim {

// How group members are ranked for win percentages.
enum class MemberScore {
  kBinary,      // follow-own-argmax reward, same scale as the algorithm
  kContinuous,  // mean accuracy 1 - |p - y| over the round's headlines
};

inline double tie_reward(bool any_good, bool any_bad) {
  if (any_good && any_bad) return 0.5;
  return any_good ? 1.0 : 0.0;
}

// Per-round rewards of every member when each follows their own argmax.
struct MemberOutcomes {
  std::vector<std::vector<double>> rewards;  // [member][round], values in {0, 0.5, 1}
  std::vector<double> totals;                // sum over rounds
  std::vector<double> continuous;            // summed 1 - eps, averaged within a round
  std::size_t best = 0;                      // n*: highest total, lowest index on ties

  std::size_t members() const { return totals.size(); }
};

inline MemberOutcomes member_outcomes(const TreatmentView& view, const RoundPlan& plan,
                                      std::span<const AdviceMatrix> advices) {
  MemberOutcomes out;
  const std::size_t n = advices.empty() ? 0 : advices.front().experts();
  const std::size_t t = plan.rounds.size();
  out.rewards.assign(n, std::vector<double>(t, 0.0));
  out.totals.assign(n, 0.0);
  out.continuous.assign(n, 0.0);
  for (std::size_t r = 0; r < t; ++r) {
    const AdviceMatrix& advice = advices[r];
    for (std::size_t m = 0; m < n; ++m) {
      const auto row = advice.row(m);
      const double top = *std::max_element(row.begin(), row.end());
      bool good = false, bad = false;
      double acc = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) {
        const double reward = arm_reward(view, plan.rounds[r].arms[a]);
        if (row[a] == top) (reward > 0.5 ? good : bad) = true;
        acc += 1.0 - std::fabs(row[a] - reward);
      }
      out.rewards[m][r] = tie_reward(good, bad);
      out.totals[m] += out.rewards[m][r];
      // label-mode arms are two views of the same headline, so this is 1 - eps there
      out.continuous[m] += acc / static_cast<double>(row.size());
    }
  }
  for (std::size_t m = 1; m < n; ++m)
    if (out.totals[m] > out.totals[out.best]) out.best = m;
  return out;
}

// Everything about one sampled group that does not depend on the algorithm.
struct GroupRounds {
  std::vector<std::size_t> members;  // local participant indices, ascending
  RoundPlan plan;
  std::vector<AdviceMatrix> advice;  // one per round
  MemberOutcomes outcomes;
};

inline GroupRounds prepare_group(const TreatmentView& view, std::vector<std::size_t> members,
                                 RoundPlan plan) {
  GroupRounds g{std::move(members), std::move(plan), {}, {}};
  g.advice.reserve(g.plan.rounds.size());
  for (const Round& r : g.plan.rounds) g.advice.push_back(assemble_advice(view, g.members, r));
  g.outcomes = member_outcomes(view, g.plan, g.advice);
  return g;
}

struct TraceEntry {
  std::size_t round = 0;
  std::size_t chosen = 0;
  double reward = 0.0;
  double best_reward = 0.0;
  std::vector<ArmSpec> arms;
  std::vector<double> scores;
  std::vector<double> predictions;
};

struct ReplicaResult {
  std::vector<double> rewards;       // r_t
  std::vector<double> best_rewards;  // r^{n*}_t
  std::size_t best_member = 0;
  std::vector<double> member_ranking;  // member scores sorted descending
  std::optional<TreeStructure> final_structure;
  std::vector<TraceEntry> trace;  // only when requested

  std::size_t rounds() const { return rewards.size(); }
  double total() const { return std::accumulate(rewards.begin(), rewards.end(), 0.0); }
  double best_total() const { return std::accumulate(best_rewards.begin(), best_rewards.end(), 0.0); }
  double accuracy() const { return total() / static_cast<double>(rounds()); }
  double best_accuracy() const { return best_total() / static_cast<double>(rounds()); }
  // Instantaneous regret R_t = r^{n*}_t - r_t.
  double regret(std::size_t t) const { return best_rewards[t] - rewards[t]; }
  double terminal_regret() const { return regret(rounds() - 1); }
  double mean_regret() const {
    double s = 0.0;
    for (std::size_t t = 0; t < rounds(); ++t) s += regret(t);
    return s / static_cast<double>(rounds());
  }
  // Does the algorithm's total strictly exceed the member at rank q (0 = best)?
  bool beats(std::size_t q) const { return total() > member_ranking[q] + 1e-9; }
};

struct ReplicaOptions {
  MemberScore member_score = MemberScore::kBinary;
  bool keep_trace = false;
};

// Drives one aggregator through a prepared group's rounds.
template <Aggregator A>
ReplicaResult run_replica(const TreatmentView& view, const GroupRounds& group, A& algo, Rng& rng,
                          const ReplicaOptions& opt = {}) {
  const RoundPlan& plan = group.plan;
  const MemberOutcomes& outcomes = group.outcomes;
  ReplicaResult res;
  const std::size_t t_max = plan.rounds.size();
  res.rewards.reserve(t_max);
  res.best_member = outcomes.best;
  res.best_rewards = outcomes.rewards[outcomes.best];
  for (std::size_t t = 0; t < t_max; ++t) {
    const Round& round = plan.rounds[t];
    const AdviceMatrix& advice = group.advice[t];
    Decision d = algo.decide(advice, rng);
    const double reward = arm_reward(view, round.arms.at(d.chosen));
    if (opt.keep_trace) {
      res.trace.push_back(TraceEntry{t, d.chosen, reward, res.best_rewards[t], round.arms,
                                     std::move(d.scores), std::move(d.predictions)});
    }
    algo.update(advice, d.chosen, reward);
    res.rewards.push_back(reward);
  }
  res.member_ranking =
      opt.member_score == MemberScore::kBinary ? outcomes.totals : outcomes.continuous;
  std::sort(res.member_ranking.begin(), res.member_ranking.end(), std::greater<>());
  if constexpr (requires { algo.structure(); }) res.final_structure = algo.structure();
  return res;
}

}  // namespace cdm::sim
