#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cdm/error.hpp"
#include "cdm/stats/distributions.hpp"
#include "cdm/stats/ranks.hpp"
#include "cdm/stats/test_result.hpp"

namespace cdm::stats {

inline constexpr std::size_t kMannWhitneyExactMax = 30;  // n_x + n_y

namespace detail {

// Exact two-sided p for the rank sum of the first sample: every subset of
// size n_x of the pooled (doubled) mid-ranks is equally likely.
inline double rank_sum_exact_p(const std::vector<long>& doubled, std::size_t n_x,
                               long observed) {
  long total = 0;
  for (long r : doubled) total += r;
  const std::size_t n = doubled.size();
  // ways[k][s]: subsets of size k with doubled rank sum s
  std::vector<std::vector<double>> ways(n_x + 1, std::vector<double>(static_cast<std::size_t>(total + 1), 0.0));
  ways[0][0] = 1.0;
  for (long r : doubled) {
    for (std::size_t k = n_x; k >= 1; --k) {
      auto& to = ways[k];
      const auto& from = ways[k - 1];
      for (long s = total; s >= r; --s) to[static_cast<std::size_t>(s)] += from[static_cast<std::size_t>(s - r)];
    }
  }
  // mean doubled rank sum = n_x (N + 1)
  const long mu2 = static_cast<long>(n_x) * static_cast<long>(n + 1);
  const long dev = std::labs(observed - mu2);
  double tail = 0.0, all = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double w = ways[n_x][static_cast<std::size_t>(s)];
    all += w;
    if (std::labs(s - mu2) >= dev) tail += w;
  }
  return std::min(1.0, tail / all);
}

}  // namespace detail

// Two-sided Mann-Whitney U test. `statistic` is U for the first sample.
inline TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                 PMethod method = PMethod::kAuto) {
  if (x.empty() || y.empty()) throw ValidationError("mann-whitney: both samples must be non-empty");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const Ranking rk = midranks(pooled);
  double r_x = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r_x += rk.ranks[i];
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  const double n = nx + ny;

  TestResult res;
  res.statistic = r_x - nx * (nx + 1.0) / 2.0;
  res.group_sizes = {x.size(), y.size()};
  if (rk.tie_sizes.size() == 1) {
    res.warning = "all observations tied; p set to 1";
    return res;
  }

  const bool exact = method == PMethod::kExact ||
                     (method == PMethod::kAuto && x.size() + y.size() <= kMannWhitneyExactMax);
  if (exact) {
    std::vector<long> doubled(rk.ranks.size());
    for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] = std::lround(2.0 * rk.ranks[i]);
    res.p_value = detail::rank_sum_exact_p(doubled, x.size(), std::lround(2.0 * r_x));
    res.exact = true;
    return res;
  }
  const double mu = nx * ny / 2.0;
  const double var = nx * ny / 12.0 * ((n + 1.0) - rk.tie_term() / (n * (n - 1.0)));
  const double z = std::max(0.0, std::fabs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p_value = two_sided_normal_p(z);
  return res;
}

}  // namespace cdm::stats
