#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdm/dataset.hpp"
#include "cdm/rng.hpp"
#include "cdm/stats/correlation.hpp"
#include "cdm/stats/mann_whitney.hpp"
#include "cdm/stats/ranks.hpp"

namespace cdm::bias {

struct DiversityOptions {
  std::size_t group_size = 10;  // even; mixed groups are half women, half men
  std::size_t groups_per_treatment = 200;
  std::uint64_t seed = 0;
};

struct GroupAccuracy {
  std::string composition;   // women, men, mixed
  std::vector<double> accuracy;  // one per sampled group
  double mean() const { return stats::mean(accuracy); }
};

struct DiversityReport {
  stats::PairwiseCorrelation men;
  stats::PairwiseCorrelation women;
  stats::PairwiseCorrelation between;
  // Expected mean pairwise correlation inside a balanced mixed group.
  double mixed() const { return (men.mean() + women.mean() + 2.0 * between.mean()) / 4.0; }

  std::vector<GroupAccuracy> groups;  // women, men, mixed
  std::optional<stats::TestResult> women_vs_men;
  std::optional<stats::TestResult> mixed_vs_men;
  std::optional<stats::TestResult> mixed_vs_women;
  std::vector<std::string> warnings;
};

// Confidence-weighted vote accuracy of a group over one treatment's headlines.
inline double cwmv_group_accuracy(const TreatmentView& v, std::span<const std::size_t> members) {
  double s = 0.0;
  for (std::size_t h = 0; h < v.num_headlines(); ++h) {
    double m = 0.0;
    for (std::size_t p : members) m += v.probability(p, h);
    s += decision_reward(m / static_cast<double>(members.size()), v.truth(h));
  }
  return s / static_cast<double>(v.num_headlines());
}

// Within- and between-gender mean pairwise Pearson correlation of mapped
// response vectors (pairs only inside a treatment), and the accuracy of
// single-gender vs mixed confidence-weighted groups.
inline DiversityReport diversity_analysis(const Dataset& d, const DiversityOptions& opt = {}) {
  if (opt.group_size < 2 || opt.group_size % 2)
    throw ValidationError("diversity: group size must be even and >= 2");
  DiversityReport rep;
  rep.groups = {{"women", {}}, {"men", {}}, {"mixed", {}}};
  for (int t : d.treatments()) {
    TreatmentView v(d, t);
    std::vector<std::size_t> men, women;
    std::vector<std::vector<double>> vm, vw;
    for (std::size_t i = 0; i < v.num_participants(); ++i) {
      const Gender g = d.participants()[v.participants()[i]].gender;
      if (g != Gender::kMale && g != Gender::kFemale) continue;
      std::vector<double> x(v.num_headlines());
      for (std::size_t h = 0; h < x.size(); ++h) x[h] = v.probability(i, h);
      (g == Gender::kMale ? men : women).push_back(i);
      (g == Gender::kMale ? vm : vw).push_back(std::move(x));
    }
    rep.men.merge(stats::within_correlation(vm));
    rep.women.merge(stats::within_correlation(vw));
    rep.between.merge(stats::between_correlation(vm, vw));

    const std::size_t k = opt.group_size;
    if (men.size() < k || women.size() < k) {
      rep.warnings.push_back("treatment " + std::to_string(t) + ": fewer than " + std::to_string(k) +
                             " men or women, skipped for group accuracy");
      continue;
    }
    Rng rng(mix_seed({opt.seed, hash_string("diversity"), static_cast<std::uint64_t>(t)}));
    auto pick = [&](const std::vector<std::size_t>& pool, std::size_t n) {
      std::vector<std::size_t> out;
      for (std::size_t j : rng.sample_without_replacement(pool.size(), n)) out.push_back(pool[j]);
      return out;
    };
    for (std::size_t r = 0; r < opt.groups_per_treatment; ++r) {
      rep.groups[0].accuracy.push_back(cwmv_group_accuracy(v, pick(women, k)));
      rep.groups[1].accuracy.push_back(cwmv_group_accuracy(v, pick(men, k)));
      auto mixed = pick(women, k / 2);
      const auto half = pick(men, k / 2);
      mixed.insert(mixed.end(), half.begin(), half.end());
      rep.groups[2].accuracy.push_back(cwmv_group_accuracy(v, mixed));
    }
  }
  if (!rep.groups[0].accuracy.empty()) {
    rep.women_vs_men = stats::mann_whitney_u(rep.groups[0].accuracy, rep.groups[1].accuracy);
    rep.mixed_vs_men = stats::mann_whitney_u(rep.groups[2].accuracy, rep.groups[1].accuracy);
    rep.mixed_vs_women = stats::mann_whitney_u(rep.groups[2].accuracy, rep.groups[0].accuracy);
  }
  return rep;
}

}  // namespace cdm::bias
