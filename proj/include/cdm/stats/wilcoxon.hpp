#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cdm/error.hpp"
#include "cdm/stats/distributions.hpp"
#include "cdm/stats/ranks.hpp"
#include "cdm/stats/test_result.hpp"

namespace cdm::stats {

inline constexpr std::size_t kWilcoxonExactMax = 25;

namespace detail {

// Exact two-sided p of the signed-rank statistic given the (doubled, hence
// integer) ranks: sign vectors are equally likely under the null.
inline double wilcoxon_exact_p(const std::vector<long>& doubled_ranks, long observed) {
  long total = 0;
  for (long r : doubled_ranks) total += r;
  std::vector<double> count(static_cast<std::size_t>(total + 1), 0.0);
  count[0] = 1.0;
  long reach = 0;
  for (long r : doubled_ranks) {
    reach += r;
    for (long s = reach; s >= r; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
  }
  const double all = std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
  const long dev = std::labs(2 * observed - total);
  double tail = 0.0;
  for (long s = 0; s <= total; ++s)
    if (std::labs(2 * s - total) >= dev) tail += count[static_cast<std::size_t>(s)];
  return std::min(1.0, tail / all);
}

}  // namespace detail

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; |differences| get mid-ranks.
inline TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                       PMethod method = PMethod::kAuto) {
  if (a.size() != b.size()) throw ValidationError("wilcoxon: samples must be paired");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
  if (diff.empty()) throw DegenerateSampleError("wilcoxon: degenerate sample, all differences are zero");
  if (diff.size() < 5)
    throw DegenerateSampleError("wilcoxon: too few non-zero pairs (" +
                                std::to_string(diff.size()) + " < 5)");

  std::vector<double> magnitude(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) magnitude[i] = std::fabs(diff[i]);
  const Ranking rk = midranks(magnitude);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i)
    if (diff[i] > 0) w_plus += rk.ranks[i];
  const double n = static_cast<double>(diff.size());
  const double total = n * (n + 1.0) / 2.0;

  TestResult res;
  res.statistic = std::min(w_plus, total - w_plus);
  res.group_sizes = {diff.size()};

  const bool exact = method == PMethod::kExact ||
                     (method == PMethod::kAuto && diff.size() <= kWilcoxonExactMax);
  if (exact) {
    std::vector<long> doubled(rk.ranks.size());
    for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] = std::lround(2.0 * rk.ranks[i]);
    res.p_value = detail::wilcoxon_exact_p(doubled, std::lround(2.0 * w_plus));
    res.exact = true;
    return res;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - rk.tie_term() / 48.0;
  if (var <= 0.0) {
    res.warning = "all differences tied; p set to 1";
    return res;
  }
  const double z = std::max(0.0, std::fabs(w_plus - total / 2.0) - 0.5) / std::sqrt(var);
  res.p_value = two_sided_normal_p(z);
  return res;
}

}  // namespace cdm::stats
