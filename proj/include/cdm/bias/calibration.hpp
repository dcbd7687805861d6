#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cdm/dataset.hpp"

namespace cdm::bias {

// Confidence level |p - 0.5|: 0 (undecided), 0.25, 0.5 (extreme answer).
inline constexpr std::array<double, 3> kConfidenceLevels = {0.0, 0.25, 0.5};

inline std::size_t confidence_level(double p) {
  const double c = std::fabs(p - 0.5);
  return c < 0.125 ? 0 : (c < 0.375 ? 1 : 2);
}

struct ConfidenceBucket {
  double level = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;  // mean thresholded decision reward (undecided = 0.5)
};

struct GroupFrequencies {
  std::string attribute;  // "gender" or "ethnicity"
  std::string group;
  std::size_t responses = 0;
  std::array<double, 3> frequency{};  // share of responses at each level
};

struct CalibrationReport {
  std::array<ConfidenceBucket, 3> buckets;
  std::vector<GroupFrequencies> groups;
};

inline CalibrationReport confidence_calibration(const Dataset& d) {
  CalibrationReport rep;
  std::array<double, 3> sum{};
  std::map<std::pair<std::string, std::string>, std::array<std::size_t, 3>> freq;
  for (std::size_t i = 0; i < 3; ++i) rep.buckets[i].level = kConfidenceLevels[i];
  for (const ResponseRecord& r : d.responses()) {
    const double p = map_response(r.raw_level);
    const std::size_t lv = confidence_level(p);
    ++rep.buckets[lv].count;
    sum[lv] += decision_reward(p, d.headlines()[r.headline].truth());
    const Participant& who = d.participants()[r.participant];
    ++freq[{"gender", std::string(to_string(who.gender))}][lv];
    const std::string eth = !who.ethnicity ? "NA" : (who.ethnic_majority ? "majority" : "minority");
    ++freq[{"ethnicity", eth}][lv];
  }
  for (std::size_t i = 0; i < 3; ++i)
    if (rep.buckets[i].count) rep.buckets[i].accuracy = sum[i] / static_cast<double>(rep.buckets[i].count);
  for (const auto& [key, counts] : freq) {
    GroupFrequencies g{key.first, key.second};
    for (std::size_t c : counts) g.responses += c;
    for (std::size_t i = 0; i < 3; ++i)
      g.frequency[i] = static_cast<double>(counts[i]) / static_cast<double>(g.responses);
    rep.groups.push_back(std::move(g));
  }
  return rep;
}

}  // namespace cdm::bias
