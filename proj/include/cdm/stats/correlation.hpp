#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "cdm/error.hpp"

namespace cdm::stats {

// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct PairwiseCorrelation {
  double sum = 0.0;
  std::size_t pairs = 0;    // pairs that contributed
  std::size_t skipped = 0;  // zero-variance pairs

  double mean() const { return pairs ? sum / static_cast<double>(pairs) : 0.0; }
  void merge(const PairwiseCorrelation& o) {
    sum += o.sum;
    pairs += o.pairs;
    skipped += o.skipped;
  }
};

// Mean correlation over unordered pairs within one set of vectors.
inline PairwiseCorrelation within_correlation(std::span<const std::vector<double>> v) {
  PairwiseCorrelation acc;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (auto r = pearson(v[i], v[j])) {
        acc.sum += *r;
        ++acc.pairs;
      } else {
        ++acc.skipped;
      }
    }
  return acc;
}

// Mean correlation over all cross pairs (a in A, b in B).
inline PairwiseCorrelation between_correlation(std::span<const std::vector<double>> a,
                                               std::span<const std::vector<double>> b) {
  PairwiseCorrelation acc;
  for (const auto& x : a)
    for (const auto& y : b) {
      if (auto r = pearson(x, y)) {
        acc.sum += *r;
        ++acc.pairs;
      } else {
        ++acc.skipped;
      }
    }
  return acc;
}

}  // namespace cdm::stats
