#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cdm/bias/samples.hpp"
#include "cdm/stats/kruskal.hpp"
#include "cdm/stats/ranks.hpp"

namespace cdm::bias {

// One (category, sentiment, genuine) cell. The unit of analysis is the
// headline: its error is the mean of |p - y| over its observations.
struct GroupErrorCell {
  Category category = Category::kGender;
  Sentiment sentiment = Sentiment::kPositive;
  bool genuine = true;
  std::vector<double> errors;  // one per headline
  double mean_error = 0.0;
  double sd = 0.0;
  std::size_t observations = 0;

  std::size_t count() const { return errors.size(); }
  std::string label() const {
    return std::string(to_string(sentiment)) + (genuine ? "/genuine" : "/altered");
  }
};

struct CategoryTest {
  Category category = Category::kGender;
  std::optional<stats::TestResult> omnibus;  // unset if fewer than two non-empty cells
  std::vector<stats::PairwiseResult> posthoc;  // only when omnibus p < alpha
  std::vector<std::size_t> cells;              // indices into GroupErrorTable::cells used by the tests
  std::string note;
};

struct GroupErrorTable {
  std::string source;
  std::vector<GroupErrorCell> cells;  // category-major, then sentiment, then genuine before altered
  std::vector<CategoryTest> tests;

  const GroupErrorCell& cell(Category c, Sentiment s, bool genuine) const {
    return cells[static_cast<std::size_t>(c) * 4 + static_cast<std::size_t>(s) * 2 + (genuine ? 0 : 1)];
  }
};

inline GroupErrorTable group_error_table(const Dataset& d, const HeadlineSamples& s, double alpha = 0.05,
                                         stats::Adjustment adjust = stats::Adjustment::kHolm) {
  GroupErrorTable t;
  t.source = s.source;
  for (Category c : kCategories)
    for (Sentiment se : kSentiments)
      for (bool g : {true, false}) {
        GroupErrorCell cell;
        cell.category = c;
        cell.sentiment = se;
        cell.genuine = g;
        t.cells.push_back(std::move(cell));
      }
  for (std::size_t h = 0; h < d.headlines().size(); ++h) {
    const Headline& hl = d.headlines()[h];
    const auto& v = s.values.at(h);
    if (v.empty()) continue;
    double e = 0.0;
    for (double p : v) e += response_error(p, hl.truth());
    auto& cell = t.cells[static_cast<std::size_t>(hl.category) * 4 +
                         static_cast<std::size_t>(hl.sentiment) * 2 + (hl.genuine ? 0 : 1)];
    cell.errors.push_back(e / static_cast<double>(v.size()));
    cell.observations += v.size();
  }
  for (auto& cell : t.cells) {
    cell.mean_error = stats::mean(cell.errors);
    cell.sd = stats::sample_sd(cell.errors);
  }
  for (Category c : kCategories) {
    CategoryTest ct;
    ct.category = c;
    std::vector<std::vector<double>> groups;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t idx = static_cast<std::size_t>(c) * 4 + i;
      if (t.cells[idx].count() > 0) {
        groups.push_back(t.cells[idx].errors);
        ct.cells.push_back(idx);
      } else {
        ct.note += (ct.note.empty() ? "" : "; ") + ("empty cell " + t.cells[idx].label());
      }
    }
    std::size_t total = 0;
    for (const auto& g : groups) total += g.size();
    if (groups.size() >= 2 && total > groups.size()) {
      ct.omnibus = stats::kruskal_wallis(groups);
      if (ct.omnibus->p_value < alpha) ct.posthoc = stats::dunn_posthoc(groups, adjust);
    }
    t.tests.push_back(std::move(ct));
  }
  return t;
}

}  // namespace cdm::bias
