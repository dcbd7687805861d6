#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cdm/error.hpp"
#include "cdm/stats/distributions.hpp"
#include "cdm/stats/ranks.hpp"
#include "cdm/stats/test_result.hpp"

namespace cdm::stats {

namespace detail {

struct PooledRanks {
  Ranking ranking;
  std::vector<double> rank_sums;
  std::vector<std::size_t> sizes;
  double n = 0.0;
};

inline PooledRanks pool_and_rank(std::span<const std::vector<double>> groups) {
  PooledRanks out;
  std::vector<double> pooled;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty())
      throw ValidationError("group " + std::to_string(g) + " has no observations");
    pooled.insert(pooled.end(), groups[g].begin(), groups[g].end());
    out.sizes.push_back(groups[g].size());
  }
  out.ranking = midranks(pooled);
  out.n = static_cast<double>(pooled.size());
  std::size_t at = 0;
  for (std::size_t sz : out.sizes) {
    double s = 0.0;
    for (std::size_t i = 0; i < sz; ++i) s += out.ranking.ranks[at + i];
    out.rank_sums.push_back(s);
    at += sz;
  }
  return out;
}

}  // namespace detail

// Kruskal-Wallis H with tie correction; effect size eta^2 = (H - k + 1)/(n - k).
inline TestResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw ValidationError("kruskal-wallis needs at least two groups");
  const auto pr = detail::pool_and_rank(groups);
  const double k = static_cast<double>(groups.size());
  const double n = pr.n;
  if (n <= k) throw ValidationError("kruskal-wallis needs more observations than groups");

  TestResult res;
  res.df = static_cast<int>(groups.size()) - 1;
  res.group_sizes = pr.sizes;
  const double correction = 1.0 - pr.ranking.tie_term() / (n * n * n - n);
  if (correction <= 0.0) {
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.effect_size = (0.0 - k + 1.0) / (n - k);
    res.warning = "all observations tied; p set to 1";
    return res;
  }
  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g)
    h += pr.rank_sums[g] * pr.rank_sums[g] / static_cast<double>(pr.sizes[g]);
  h = (12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0)) / correction;
  h = std::max(h, 0.0);
  res.statistic = h;
  res.p_value = chi2_sf(h, k - 1.0);
  res.effect_size = (h - k + 1.0) / (n - k);
  return res;
}

enum class Adjustment { kNone, kBonferroni, kHolm };

inline Adjustment parse_adjustment(const std::string& s) {
  if (s == "none") return Adjustment::kNone;
  if (s == "bonferroni") return Adjustment::kBonferroni;
  if (s == "holm") return Adjustment::kHolm;
  throw ValidationError("unknown p-value adjustment '" + s + "'");
}

inline std::string to_string(Adjustment a) {
  switch (a) {
    case Adjustment::kNone: return "none";
    case Adjustment::kBonferroni: return "bonferroni";
    case Adjustment::kHolm: return "holm";
  }
  return "?";
}

inline std::vector<double> adjust_p_values(std::span<const double> p, Adjustment how) {
  const std::size_t m = p.size();
  std::vector<double> out(p.begin(), p.end());
  if (how == Adjustment::kNone || m == 0) return out;
  if (how == Adjustment::kBonferroni) {
    for (double& v : out) v = std::min(1.0, v * static_cast<double>(m));
    return out;
  }
  // Holm step-down, made monotone
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double adj = std::min(1.0, static_cast<double>(m - i) * p[order[i]]);
    running = std::max(running, adj);
    out[order[i]] = running;
  }
  return out;
}

struct PairwiseResult {
  std::size_t i = 0;
  std::size_t j = 0;
  double z = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
};

// Dunn's pairwise test on the pooled ranks of a Kruskal-Wallis layout.
inline std::vector<PairwiseResult> dunn_posthoc(std::span<const std::vector<double>> groups,
                                                Adjustment how = Adjustment::kHolm) {
  if (groups.size() < 2) throw ValidationError("dunn test needs at least two groups");
  const auto pr = detail::pool_and_rank(groups);
  const double n = pr.n;
  const double base = n * (n + 1.0) / 12.0 - pr.ranking.tie_term() / (12.0 * (n - 1.0));
  std::vector<PairwiseResult> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double ni = static_cast<double>(pr.sizes[i]);
      const double nj = static_cast<double>(pr.sizes[j]);
      const double se = std::sqrt(base * (1.0 / ni + 1.0 / nj));
      PairwiseResult r{i, j};
      const double diff = pr.rank_sums[i] / ni - pr.rank_sums[j] / nj;
      r.z = se > 0.0 ? diff / se : 0.0;
      r.p_value = se > 0.0 ? two_sided_normal_p(r.z) : 1.0;
      out.push_back(r);
    }
  }
  std::vector<double> raw;
  for (const auto& r : out) raw.push_back(r.p_value);
  const auto adj = adjust_p_values(raw, how);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].p_adjusted = adj[i];
  return out;
}

}  // namespace cdm::stats
