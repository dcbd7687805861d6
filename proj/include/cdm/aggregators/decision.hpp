#pragma once

#include <concepts>
#include <cstddef>
#include <string_view>
#include <vector>

#include "cdm/advice.hpp"
#include "cdm/rng.hpp"

namespace cdm {

// Output of one aggregation round.
struct Decision {
  std::vector<double> scores;         // one per arm; higher is preferred
  std::size_t chosen = 0;
  std::vector<double> predictions;    // per arm, estimated probability the arm rewards, in [0,1]
  std::vector<double> probabilities;  // selection distribution for randomized learners
};

// Online aggregator: decide on a round's advice, then learn from the reward
// of the chosen arm.
template <class A>
concept Aggregator = requires(A a, const A ca, const AdviceMatrix& advice, Rng& rng,
                              std::size_t arm, double reward) {
  { a.decide(advice, rng) } -> std::same_as<Decision>;
  a.update(advice, arm, reward);
  { ca.name() } -> std::convertible_to<std::string_view>;
};

}  // namespace cdm
