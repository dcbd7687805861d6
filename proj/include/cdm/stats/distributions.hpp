#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

namespace cdm::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Upper tail P(Z > z), accurate far into the tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double two_sided_normal_p(double z) {
  return std::clamp(2.0 * normal_sf(std::fabs(z)), 0.0, 1.0);
}

// P(X > x) for X ~ chi-square with `df` degrees of freedom.
inline double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

}  // namespace cdm::stats
