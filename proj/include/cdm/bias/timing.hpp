#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "cdm/dataset.hpp"

namespace cdm::bias {

struct TimePoint {
  double time_ms = 0.0;  // mean response time inside the window
  double accuracy = 0.0;
};

// Responses sorted by response time, then a moving average of accuracy over
// `window` consecutive responses (complete windows only).
inline std::vector<TimePoint> response_time_curve(const Dataset& d, std::size_t window = 100) {
  const auto& rs = d.responses();
  if (window < 1) throw ValidationError("response-time window must be >= 1");
  if (window > rs.size())
    throw ValidationError("response-time window (" + std::to_string(window) + ") exceeds the " +
                          std::to_string(rs.size()) + " responses");
  std::vector<std::size_t> order(rs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rs[a].response_time_ms < rs[b].response_time_ms;
  });
  std::vector<double> acc(rs.size()), time(rs.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ResponseRecord& r = rs[order[i]];
    acc[i] = response_accuracy(map_response(r.raw_level), d.headlines()[r.headline].truth());
    time[i] = static_cast<double>(r.response_time_ms);
  }
  // prefix sums keep every window exact to rounding regardless of length
  std::vector<double> pa(rs.size() + 1, 0.0), pt(rs.size() + 1, 0.0);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    pa[i + 1] = pa[i] + acc[i];
    pt[i + 1] = pt[i] + time[i];
  }
  std::vector<TimePoint> out;
  const double w = static_cast<double>(window);
  for (std::size_t i = window; i <= rs.size(); ++i)
    out.push_back({(pt[i] - pt[i - window]) / w, (pa[i] - pa[i - window]) / w});
  return out;
}

}  // namespace cdm::bias
