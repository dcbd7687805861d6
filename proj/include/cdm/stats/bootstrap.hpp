#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cdm/error.hpp"
#include "cdm/rng.hpp"
#include "cdm/stats/ranks.hpp"

namespace cdm::stats {

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile of sorted data with linear interpolation between order
// statistics (q in [0,1]).
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct BootstrapOptions {
  std::size_t resamples = 1000;    // B
  std::size_t sample_size = 1000;  // m, drawn with replacement
  double level = 0.95;
};

// Mean of `values` with a percentile bootstrap interval over resample means.
inline Interval bootstrap_ci(std::span<const double> values, Rng& rng,
                             const BootstrapOptions& opt = {}) {
  if (values.empty()) throw ValidationError("bootstrap of empty sample");
  if (opt.sample_size < 1 || opt.resamples < 1)
    throw ValidationError("bootstrap needs at least one resample of size >= 1");
  Interval out;
  out.mean = mean(values);
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    out.mean = out.lo = out.hi = values[0];
    return out;
  }
  std::vector<double> means(opt.resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < opt.sample_size; ++i) s += values[rng.below(values.size())];
    m = s / static_cast<double>(opt.sample_size);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - opt.level) / 2.0;
  out.lo = percentile_sorted(means, tail);
  out.hi = percentile_sorted(means, 1.0 - tail);
  // Resample means of a constant can differ from the mean in the last ulp.
  out.lo = std::min(out.lo, out.mean);
  out.hi = std::max(out.hi, out.mean);
  return out;
}

}  // namespace cdm::stats
