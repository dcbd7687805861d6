#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace cdm::stats {

struct Ranking {
  std::vector<double> ranks;           // 1-based mid-ranks, in input order
  std::vector<std::size_t> tie_sizes;  // size of every tie group (including singletons)

  // sum over tie groups of t^3 - t
  double tie_term() const {
    double s = 0.0;
    for (std::size_t t : tie_sizes) {
      const double d = static_cast<double>(t);
      s += d * d * d - d;
    }
    return s;
  }
};

inline Ranking midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Ranking r;
  r.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) r.ranks[order[k]] = mid;
    r.tie_sizes.push_back(j - i);
    i = j;
  }
  return r;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace cdm::stats
