#pragma once

#include <string_view>

#include "cdm/aggregators/decision.hpp"

namespace cdm {

namespace detail {

inline std::vector<double> advice_means(const AdviceMatrix& advice) {
  std::vector<double> out(advice.arms());
  for (std::size_t a = 0; a < advice.arms(); ++a) out[a] = advice.column_mean(a);
  return out;
}

inline double vote_sign(double p) {
  if (p > 0.5) return 1.0;
  if (p < 0.5) return -1.0;
  return 0.0;
}

}  // namespace detail

// -- MajorityVote -------------------------------------------------------------

// One vote per expert and arm: +1 above 0.5, -1 below, 0 when undecided.
inline std::vector<double> mv_scores(const AdviceMatrix& advice) {
  std::vector<double> scores(advice.arms(), 0.0);
  for (std::size_t n = 0; n < advice.experts(); ++n)
    for (std::size_t a = 0; a < advice.arms(); ++a) scores[a] += detail::vote_sign(advice(n, a));
  return scores;
}

class MajorityVote {
 public:
  std::string_view name() const { return "mv"; }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    d.scores = mv_scores(advice);
    d.chosen = rng.argmax(d.scores);
    d.predictions = detail::advice_means(advice);
    return d;
  }

  void update(const AdviceMatrix&, std::size_t, double) {}
};

// -- ConfidenceWeightedVote ---------------------------------------------------

// score(a) = sum_n (p_n(a) - 0.5) = N * (mean advice - 0.5).
inline std::vector<double> cwmv_scores(const AdviceMatrix& advice) {
  std::vector<double> scores(advice.arms(), 0.0);
  for (std::size_t n = 0; n < advice.experts(); ++n)
    for (std::size_t a = 0; a < advice.arms(); ++a) scores[a] += advice(n, a) - 0.5;
  return scores;
}

class ConfidenceWeightedVote {
 public:
  std::string_view name() const { return "cwmv"; }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    d.scores = cwmv_scores(advice);
    d.chosen = rng.argmax(d.scores);
    d.predictions = detail::advice_means(advice);
    return d;
  }

  void update(const AdviceMatrix&, std::size_t, double) {}
};

// -- RandomExpert -------------------------------------------------------------

// Follows a uniformly drawn expert each round.
inline std::size_t random_expert_choose(const AdviceMatrix& advice, Rng& rng) {
  const std::size_t n = rng.below(advice.experts());
  return rng.argmax(advice.row(n));
}

class RandomExpert {
 public:
  std::string_view name() const { return "random"; }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    const std::size_t n = rng.below(advice.experts());
    const auto row = advice.row(n);
    d.scores.assign(row.begin(), row.end());
    d.chosen = rng.argmax(row);
    d.predictions = detail::advice_means(advice);
    return d;
  }

  void update(const AdviceMatrix&, std::size_t, double) {}
};

}  // namespace cdm
