#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdm/bias/samples.hpp"
#include "cdm/stats/gee.hpp"

namespace cdm::bias {

enum class Split { kGender, kAge, kEthnicity };
inline constexpr std::array<Split, 3> kSplits = {Split::kGender, Split::kAge, Split::kEthnicity};

inline std::string to_string(Split s) {
  switch (s) {
    case Split::kGender: return "gender";
    case Split::kAge: return "age";
    case Split::kEthnicity: return "ethnicity";
  }
  return "?";
}

// Group labels of a split; index 1 is the indicator coded 1 in the GEE.
inline std::array<std::string, 2> split_groups(Split s) {
  switch (s) {
    case Split::kGender: return {"male", "female"};
    case Split::kAge: return {"<35", ">=35"};
    case Split::kEthnicity: return {"majority", "minority"};
  }
  return {"?", "?"};
}

// 0 or 1 for the two groups of a split, nullopt when excluded (NA, other).
inline std::optional<int> split_group(const Participant& p, Split s) {
  switch (s) {
    case Split::kGender:
      if (p.gender == Gender::kMale) return 0;
      if (p.gender == Gender::kFemale) return 1;
      return std::nullopt;
    case Split::kAge:
      if (!p.age) return std::nullopt;
      return p.age_group() == AgeGroup::kUnder35 ? 0 : 1;
    case Split::kEthnicity:
      if (!p.ethnicity) return std::nullopt;
      return p.ethnic_majority ? 0 : 1;
  }
  return std::nullopt;
}

struct DemographicCell {
  Split split = Split::kGender;
  Category category = Category::kGender;
  std::array<double, 2> accuracy{};  // mean 1 - eps per group
  std::array<std::size_t, 2> responses{};
  std::array<std::size_t, 2> participants{};
  std::optional<stats::GeeTerm> effect;  // group indicator coefficient, Bonferroni over categories
  std::string warning;
};

struct DemographicReport {
  std::vector<DemographicCell> cells;  // split-major, then category
  std::vector<std::string> warnings;

  const DemographicCell& cell(Split s, Category c) const {
    for (const auto& x : cells)
      if (x.split == s && x.category == c) return x;
    throw ValidationError("no demographic cell for " + to_string(s) + "/" + std::string(to_string(c)));
  }
};

// Accuracy per demographic split and headline category, with a GEE of
// per-response accuracy on the group indicator clustered by participant.
inline DemographicReport demographic_performance(const Dataset& d,
                                                 stats::WorkingCorrelation corr = stats::WorkingCorrelation::kExchangeable) {
  DemographicReport rep;
  for (Split s : kSplits) {
    std::vector<std::optional<int>> group(d.participants().size());
    std::array<std::size_t, 2> members{};
    for (std::size_t i = 0; i < d.participants().size(); ++i) {
      group[i] = split_group(d.participants()[i], s);
      if (group[i]) ++members[static_cast<std::size_t>(*group[i])];
    }
    if (members[0] == 0 || members[1] == 0) {
      rep.warnings.push_back("split " + to_string(s) + " skipped: a group has no participants");
      continue;
    }
    std::vector<DemographicCell> cells;
    for (Category c : kCategories) {
      DemographicCell cell;
      cell.split = s;
      cell.category = c;
      cell.participants = members;
      std::vector<double> y, x;
      std::vector<std::int64_t> cluster;
      std::array<double, 2> sum{};
      for (const ResponseRecord& r : d.responses()) {
        const Headline& h = d.headlines()[r.headline];
        if (h.category != c || !group[r.participant]) continue;
        const int g = *group[r.participant];
        const double a = response_accuracy(map_response(r.raw_level), h.truth());
        sum[static_cast<std::size_t>(g)] += a;
        ++cell.responses[static_cast<std::size_t>(g)];
        y.push_back(a);
        x.push_back(g);
        cluster.push_back(static_cast<std::int64_t>(r.participant));
      }
      for (int g = 0; g < 2; ++g)
        cell.accuracy[g] = cell.responses[g] ? sum[g] / static_cast<double>(cell.responses[g]) : 0.0;
      if (cell.responses[0] && cell.responses[1]) {
        Eigen::VectorXd ey = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        Eigen::MatrixXd ex(static_cast<Eigen::Index>(y.size()), 2);
        ex.col(0).setOnes();
        ex.col(1) = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        stats::GeeOptions opt;
        opt.correlation = corr;
        auto model = stats::gee_fit(ey, ex, cluster, {"intercept", split_groups(s)[1]}, opt);
        if (!model.converged) cell.warning = "GEE did not converge";
        cell.effect = model.terms[1];
      } else {
        cell.warning = "a group has no responses";
      }
      cells.push_back(std::move(cell));
    }
    // Bonferroni over the categories tested within the split
    std::size_t tested = 0;
    for (const auto& c : cells) tested += c.effect.has_value();
    for (auto& c : cells)
      if (c.effect) c.effect->p_adjusted = std::min(1.0, c.effect->p_value * static_cast<double>(tested));
    rep.cells.insert(rep.cells.end(), cells.begin(), cells.end());
  }
  return rep;
}

// Error of the per-headline average regressed on headline class and
// authenticity (baseline: age, altered), clustered by pair.
inline stats::GeeModel headline_error_gee(const Dataset& d, const HeadlineSamples& s,
                                          stats::WorkingCorrelation corr = stats::WorkingCorrelation::kExchangeable) {
  std::vector<double> y;
  std::vector<std::array<double, 6>> rows;
  std::vector<std::int64_t> cluster;
  std::map<PairId, std::int64_t> pair_index;
  for (std::size_t h = 0; h < d.headlines().size(); ++h) {
    if (s.values.at(h).empty()) continue;
    const Headline& hl = d.headlines()[h];
    const double eth = hl.category == Category::kEthnicity, gen = hl.category == Category::kGender;
    const double g = hl.genuine;
    y.push_back(response_error(s.mean(h), hl.truth()));
    rows.push_back({1.0, eth, gen, g, eth * g, gen * g});
    cluster.push_back(pair_index.emplace(hl.pair_id, static_cast<std::int64_t>(pair_index.size())).first->second);
  }
  Eigen::VectorXd ey(static_cast<Eigen::Index>(y.size()));
  Eigen::MatrixXd ex(static_cast<Eigen::Index>(y.size()), 6);
  for (std::size_t i = 0; i < y.size(); ++i) {
    ey(static_cast<Eigen::Index>(i)) = y[i];
    for (int j = 0; j < 6; ++j) ex(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  stats::GeeOptions opt;
  opt.correlation = corr;
  return stats::gee_fit(ey, ex, cluster,
                        {"intercept", "class_ethnicity", "class_gender", "genuine", "class_ethnicity:genuine",
                         "class_gender:genuine"},
                        opt);
}

}  // namespace cdm::bias
