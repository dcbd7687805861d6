#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cdm/bias/samples.hpp"
#include "cdm/stats/mann_whitney.hpp"

namespace cdm::bias {

enum class Quadrant { kQ1 = 0, kQ2, kQ3, kQ4, kBoundary };

inline std::string to_string(Quadrant q) {
  switch (q) {
    case Quadrant::kQ1: return "Q1";
    case Quadrant::kQ2: return "Q2";
    case Quadrant::kQ3: return "Q3";
    case Quadrant::kQ4: return "Q4";
    case Quadrant::kBoundary: return "boundary";
  }
  return "?";
}

inline constexpr double kBoundaryTolerance = 1e-12;

// Q1 (<, >) false stereotype, Q2 (>, >) positive framing, Q3 (>, <) common
// knowledge, Q4 (<, <) negative framing; either mean at 0.5 is a boundary.
inline Quadrant classify(double mean_original, double mean_altered) {
  if (std::fabs(mean_original - 0.5) <= kBoundaryTolerance ||
      std::fabs(mean_altered - 0.5) <= kBoundaryTolerance)
    return Quadrant::kBoundary;
  const bool o = mean_original > 0.5, a = mean_altered > 0.5;
  if (!o && a) return Quadrant::kQ1;
  if (o && a) return Quadrant::kQ2;
  if (o && !a) return Quadrant::kQ3;
  return Quadrant::kQ4;
}

struct FramingPoint {
  PairId pair;
  Category category = Category::kGender;
  Sentiment sentiment = Sentiment::kPositive;
  std::size_t original = 0;  // headline indices
  std::size_t altered = 0;
  double mean_original = 0.0;
  double mean_altered = 0.0;
  std::size_t n_original = 0;
  std::size_t n_altered = 0;
  Quadrant quadrant = Quadrant::kBoundary;
  double p_value = 1.0;
};

struct FramingResult {
  std::string source;
  std::vector<FramingPoint> points;  // ordered by pair id
  std::array<std::size_t, 5> counts{};
  std::size_t significant = 0;  // pairs with p < alpha
  double alpha = 0.05;

  double framing_fraction() const {
    return points.empty() ? 0.0 : static_cast<double>(significant) / static_cast<double>(points.size());
  }
  std::size_t count(Quadrant q) const { return counts[static_cast<std::size_t>(q)]; }
};

inline FramingResult framing_analysis(const Dataset& d, const HeadlineSamples& s, double alpha = 0.05) {
  FramingResult res;
  res.source = s.source;
  res.alpha = alpha;
  std::map<PairId, std::size_t> originals;
  for (std::size_t h = 0; h < d.headlines().size(); ++h)
    if (d.headlines()[h].genuine) originals.emplace(d.headlines()[h].pair_id, h);
  for (const auto& [pair, h] : originals) {
    const std::size_t alt = d.counterpart(h);
    const auto& vo = s.values.at(h);
    const auto& va = s.values.at(alt);
    if (vo.empty() || va.empty())
      throw ValidationError("framing: pair " + pair.value + " lacks observations for " +
                            (vo.empty() ? "its original" : "its altered") + " headline");
    FramingPoint p;
    p.pair = pair;
    p.category = d.headlines()[h].category;
    p.sentiment = d.headlines()[h].sentiment;
    p.original = h;
    p.altered = alt;
    p.mean_original = s.mean(h);
    p.mean_altered = s.mean(alt);
    p.n_original = vo.size();
    p.n_altered = va.size();
    p.quadrant = classify(p.mean_original, p.mean_altered);
    p.p_value = stats::mann_whitney_u(vo, va).p_value;
    ++res.counts[static_cast<std::size_t>(p.quadrant)];
    res.significant += p.p_value < alpha;
    res.points.push_back(p);
  }
  return res;
}

}  // namespace cdm::bias
