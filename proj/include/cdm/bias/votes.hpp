#pragma once

#include <optional>
#include <vector>

#include "cdm/dataset.hpp"
#include "cdm/error.hpp"
#include "cdm/stats/ranks.hpp"
#include "cdm/stats/wilcoxon.hpp"

namespace cdm::bias {

// Whole-crowd votes: every respondent of a headline votes on whether it is
// genuine. Reward per headline is 1 right, 0 wrong, 0.5 on a tied score.
struct VoteComparison {
  std::vector<double> mv;    // per headline, dataset order, answered headlines only
  std::vector<double> cwmv;
  std::optional<stats::TestResult> wilcoxon;  // paired over headlines; unset when all pairs tie

  double mv_accuracy() const { return stats::mean(mv); }
  double cwmv_accuracy() const { return stats::mean(cwmv); }
};

inline double vote_reward(double score, int truth) {
  if (score == 0.0) return 0.5;
  return (score > 0.0) == (truth == 1) ? 1.0 : 0.0;
}

inline VoteComparison crowd_votes(const Dataset& d) {
  const std::size_t nh = d.headlines().size();
  std::vector<double> mv(nh, 0.0), cw(nh, 0.0);
  std::vector<std::size_t> seen(nh, 0);
  for (const ResponseRecord& r : d.responses()) {
    // levels are integers, so the sums stay exact in quarters
    const double p = map_response(r.raw_level);
    mv[r.headline] += p > 0.5 ? 1.0 : (p < 0.5 ? -1.0 : 0.0);
    cw[r.headline] += p - 0.5;
    ++seen[r.headline];
  }
  VoteComparison out;
  for (std::size_t h = 0; h < nh; ++h) {
    if (!seen[h]) continue;
    const int truth = d.headlines()[h].truth();
    out.mv.push_back(vote_reward(mv[h], truth));
    out.cwmv.push_back(vote_reward(cw[h], truth));
  }
  if (out.mv.empty()) throw ValidationError("no responses to vote with");
  try {
    out.wilcoxon = stats::wilcoxon_signed_rank(out.cwmv, out.mv);
  } catch (const DegenerateSampleError&) {
  }
  return out;
}

}  // namespace cdm::bias
