#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cdm/advice.hpp"
#include "cdm/dataset.hpp"
#include "cdm/error.hpp"
#include "cdm/rng.hpp"

namespace cdm::sim {

enum class EvaluationMode {
  kLabel,              // one headline per round, arms = {claim genuine, claim altered}
  kHeadlineSelection,  // K headlines per round, pick the one believed genuine
};

inline std::string to_string(EvaluationMode m) {
  return m == EvaluationMode::kLabel ? "label" : "headline";
}

inline EvaluationMode parse_mode(const std::string& s) {
  if (s == "label") return EvaluationMode::kLabel;
  if (s == "headline" || s == "headline-selection") return EvaluationMode::kHeadlineSelection;
  throw ValidationError("unknown evaluation mode '" + s + "' (expected label or headline)");
}

struct ArmSpec {
  std::size_t headline = 0;    // local index within the treatment view
  bool claims_genuine = true;  // advice is p when true, 1 - p otherwise
};

struct Round {
  std::vector<ArmSpec> arms;
};

struct RoundPlan {
  EvaluationMode mode = EvaluationMode::kLabel;
  std::vector<Round> rounds;

  std::size_t arms() const { return rounds.empty() ? 0 : rounds.front().arms.size(); }
  // Distinct headlines revealed per round.
  std::size_t headlines_per_round() const { return mode == EvaluationMode::kLabel ? 1 : arms(); }
};

// Reward of an arm: 1 when its claim about the headline is true.
inline double arm_reward(const TreatmentView& view, const ArmSpec& arm) {
  const int y = view.truth(arm.headline);
  return (arm.claims_genuine ? y == 1 : y == 0) ? 1.0 : 0.0;
}

// Shuffled, repeat-free round schedule over one treatment's headlines.
// `arms` is ignored in label mode.
inline RoundPlan build_rounds(const TreatmentView& view, EvaluationMode mode, std::size_t arms,
                              Rng& rng) {
  const std::size_t h = view.num_headlines();
  RoundPlan plan;
  plan.mode = mode;
  if (mode == EvaluationMode::kLabel) {
    std::vector<std::size_t> order(h);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    for (std::size_t j : order) plan.rounds.push_back(Round{{{j, true}, {j, false}}});
    return plan;
  }
  if (arms < 1 || h % arms != 0)
    throw ValidationError("arms per round (" + std::to_string(arms) + ") must divide " +
                          std::to_string(h));
  if (arms % 2 == 0) {
    std::vector<std::size_t> genuine, altered;
    for (std::size_t j = 0; j < h; ++j) (view.truth(j) == 1 ? genuine : altered).push_back(j);
    if (genuine.size() != altered.size())
      throw ValidationError("balanced rounds need as many genuine as altered headlines");
    rng.shuffle(genuine.begin(), genuine.end());
    rng.shuffle(altered.begin(), altered.end());
    const std::size_t half = arms / 2;
    for (std::size_t r = 0; r < h / arms; ++r) {
      Round round;
      for (std::size_t i = 0; i < half; ++i) round.arms.push_back({genuine[r * half + i], true});
      for (std::size_t i = 0; i < half; ++i) round.arms.push_back({altered[r * half + i], true});
      rng.shuffle(round.arms.begin(), round.arms.end());
      plan.rounds.push_back(std::move(round));
    }
    return plan;
  }
  std::vector<std::size_t> order(h);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  for (std::size_t r = 0; r < h / arms; ++r) {
    Round round;
    for (std::size_t i = 0; i < arms; ++i) round.arms.push_back({order[r * arms + i], true});
    plan.rounds.push_back(std::move(round));
  }
  return plan;
}

// Advice of the given members (local participant indices) for one round.
inline AdviceMatrix assemble_advice(const TreatmentView& view, std::span<const std::size_t> members,
                                    const Round& round) {
  AdviceMatrix m(members.size(), round.arms.size());
  for (std::size_t a = 0; a < round.arms.size(); ++a) {
    const ArmSpec& arm = round.arms[a];
    m.arm_info(a) = ArmInfo{view.category(arm.headline), arm.headline};
    for (std::size_t n = 0; n < members.size(); ++n) {
      const double p = view.probability(members[n], arm.headline);
      if (std::isnan(p))
        throw ValidationError("missing response: participant " +
                              std::to_string(view.participants()[members[n]]) + ", headline " +
                              std::to_string(view.headlines()[arm.headline]));
      m(n, a) = arm.claims_genuine ? p : 1.0 - p;
    }
  }
  return m;
}

}  // namespace cdm::sim
