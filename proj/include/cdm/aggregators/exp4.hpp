#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

#include "cdm/aggregators/decision.hpp"
#include "cdm/error.hpp"

namespace cdm {

// Finite-horizon tuning gamma = min(1, sqrt(K ln N / ((e - 1) T))). A single
// expert would give gamma = 0, so ln N is floored at ln 2.
inline double default_exp4_gamma(std::size_t experts, std::size_t arms, std::size_t horizon) {
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(experts, 2)));
  const double k = static_cast<double>(arms);
  const double t = static_cast<double>(std::max<std::size_t>(horizon, 1));
  return std::min(1.0, std::sqrt(k * log_n / ((std::numbers::e - 1.0) * t)));
}

// EXP4 over expert advice rows. Ratings are not distributions, so each row is
// normalized by its sum (uniform when the row is all zeros).
class Exp4 {
 public:
  static constexpr double kRenormalizeAbove = 1e100;

  Exp4(std::size_t experts, double gamma)
      : gamma_(gamma), weights_(experts, 1.0), reward_estimates_(experts, 0.0) {
    if (experts < 1) throw ValidationError("EXP4 needs at least one expert");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("EXP4 gamma must be in (0, 1]");
  }

  std::string_view name() const { return "exp4"; }
  double gamma() const { return gamma_; }
  const std::vector<double>& weights() const { return weights_; }
  // Running sum of importance-weighted reward estimates <xi_n, r_hat>.
  const std::vector<double>& reward_estimates() const { return reward_estimates_; }

  static std::vector<double> advice_distribution(const AdviceMatrix& advice, std::size_t expert) {
    const auto row = advice.row(expert);
    double total = 0.0;
    for (double v : row) total += v;
    std::vector<double> xi(row.size());
    for (std::size_t a = 0; a < row.size(); ++a)
      xi[a] = total > 0.0 ? row[a] / total : 1.0 / static_cast<double>(row.size());
    return xi;
  }

  std::vector<double> arm_probabilities(const AdviceMatrix& advice) const {
    const std::size_t k = advice.arms();
    const double total = weight_sum();
    std::vector<double> probs(k, 0.0);
    for (std::size_t n = 0; n < weights_.size(); ++n) {
      const auto xi = advice_distribution(advice, n);
      const double share = weights_[n] / total;
      for (std::size_t a = 0; a < k; ++a) probs[a] += share * xi[a];
    }
    for (double& p : probs) p = (1.0 - gamma_) * p + gamma_ / static_cast<double>(k);
    return probs;
  }

  // Weighted advice mean: the learner's estimate that arm `arm` rewards.
  double predict(const AdviceMatrix& advice, std::size_t arm) const {
    const double total = weight_sum();
    double s = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) s += weights_[n] / total * advice(n, arm);
    return s;
  }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    d.probabilities = arm_probabilities(advice);
    d.scores = d.probabilities;
    d.chosen = rng.categorical(d.probabilities);
    d.predictions.resize(advice.arms());
    for (std::size_t a = 0; a < advice.arms(); ++a) d.predictions[a] = predict(advice, a);
    return d;
  }

  void update(const AdviceMatrix& advice, std::size_t chosen, double reward) {
    const auto probs = arm_probabilities(advice);
    const double r_hat = reward / probs[chosen];
    const double k = static_cast<double>(advice.arms());
    for (std::size_t n = 0; n < weights_.size(); ++n) {
      const double y_hat = advice_distribution(advice, n)[chosen] * r_hat;
      reward_estimates_[n] += y_hat;
      weights_[n] *= std::exp(gamma_ * y_hat / k);
    }
    const double top = *std::max_element(weights_.begin(), weights_.end());
    if (!std::isfinite(top)) throw NumericError("EXP4 weights overflowed");
    if (top > kRenormalizeAbove)
      for (double& w : weights_) w = std::max(w / top, std::numeric_limits<double>::min());
  }

 private:
  double weight_sum() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  double gamma_;
  std::vector<double> weights_;
  std::vector<double> reward_estimates_;
};

}  // namespace cdm
