#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "cdm/aggregators/metacmab.hpp"

namespace cdm {

// Candidate partitions of {gender, ethnicity, age}, in the order
// no split / ethnicity off / gender off / age off / all separate.
enum class TreeStructure : int {
  kNoSplit = 0,
  kSplitEthnicity = 1,
  kSplitGender = 2,
  kSplitAge = 3,
  kSplitAll = 4,
};
inline constexpr int kNumTreeStructures = 5;

inline std::string_view to_string(TreeStructure s) {
  switch (s) {
    case TreeStructure::kNoSplit: return "no_split";
    case TreeStructure::kSplitEthnicity: return "split_ethnicity";
    case TreeStructure::kSplitGender: return "split_gender";
    case TreeStructure::kSplitAge: return "split_age";
    case TreeStructure::kSplitAll: return "split_all";
  }
  return "?";
}

struct ExpertiseTreeParams {
  MetaCmabParams leaf;
  // Complexity penalty per leaf is penalty_scale * (mean per-round prequential
  // loss of the global model) unless `penalty` fixes it. +inf forces no split.
  // A leaf has to save about five rounds of loss; much smaller values split on
  // headline-difficulty noise in homogeneous crowds.
  double penalty_scale = 5.0;
  std::optional<double> penalty;
};

// Context-partitioned MetaCMAB. Seven leaf models cover every region any
// candidate structure can use; each observation updates all leaves whose
// region contains the observed category, after scoring them prequentially.
class ExpertiseTree {
 public:
  // Leaf regions as category bitmasks (bit = 1 << Category).
  static constexpr std::array<unsigned, 7> kLeafRegions = {
      0b111,  // global
      0b001,  // {gender}
      0b010,  // {ethnicity}
      0b100,  // {age}
      0b101,  // {gender, age}
      0b110,  // {ethnicity, age}
      0b011,  // {gender, ethnicity}
  };
  static constexpr std::array<std::array<int, 3>, kNumTreeStructures> kStructureLeaves = {{
      {0, -1, -1},
      {2, 4, -1},
      {1, 5, -1},
      {3, 6, -1},
      {1, 2, 3},
  }};

  explicit ExpertiseTree(std::size_t experts, ExpertiseTreeParams params = {})
      : params_(params) {
    for (std::size_t i = 0; i < kLeafRegions.size(); ++i) leaves_.emplace_back(experts, params.leaf);
    losses_.fill(0.0);
  }

  std::string_view name() const { return "etree"; }

  static int num_leaves(TreeStructure s) {
    int n = 0;
    for (int leaf : kStructureLeaves[static_cast<int>(s)]) n += leaf >= 0;
    return n;
  }

  // Leaf of structure `s` whose region owns category `c`.
  static int leaf_for(TreeStructure s, Category c) {
    const unsigned bit = 1u << static_cast<unsigned>(c);
    for (int leaf : kStructureLeaves[static_cast<int>(s)])
      if (leaf >= 0 && (kLeafRegions[static_cast<std::size_t>(leaf)] & bit)) return leaf;
    return 0;
  }

  TreeStructure structure() const { return active_; }
  const MetaCmab& leaf(int i) const { return leaves_[static_cast<std::size_t>(i)]; }
  double leaf_loss(int i) const { return losses_[static_cast<std::size_t>(i)]; }
  std::size_t rounds() const { return rounds_; }

  double penalty() const {
    if (params_.penalty) return *params_.penalty;
    if (rounds_ == 0) return 0.0;
    return params_.penalty_scale * losses_[0] / static_cast<double>(rounds_);
  }

  // Sum of leaf prequential losses plus penalty * number of leaves.
  double penalized_loss(TreeStructure s) const {
    double total = 0.0;
    for (int leaf : kStructureLeaves[static_cast<int>(s)])
      if (leaf >= 0) total += losses_[static_cast<std::size_t>(leaf)];
    return total + penalty() * num_leaves(s);
  }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    d.scores.resize(advice.arms());
    d.predictions.resize(advice.arms());
    for (std::size_t a = 0; a < advice.arms(); ++a) {
      const MetaCmab& model =
          leaves_[static_cast<std::size_t>(leaf_for(active_, advice.arm_info(a).category))];
      const Eigen::VectorXd x = advice_feature(advice, a);
      d.scores[a] = model.score(x);
      d.predictions[a] = model.predict(x);
    }
    d.chosen = rng.argmax(d.scores);
    return d;
  }

  void update(const AdviceMatrix& advice, std::size_t chosen, double reward) {
    observe(advice_feature(advice, chosen), advice.arm_info(chosen).category, reward);
  }

  void observe(const Eigen::VectorXd& x, Category category, double reward) {
    const unsigned bit = 1u << static_cast<unsigned>(category);
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      if (!(kLeafRegions[i] & bit)) continue;
      const double err = leaves_[i].predict(x) - reward;
      losses_[i] += err * err;
      leaves_[i].observe(x, reward);
    }
    ++rounds_;
    active_ = select_structure();
  }

 private:
  TreeStructure select_structure() const {
    const double c = penalty();
    if (std::isinf(c)) return TreeStructure::kNoSplit;
    // Candidates are listed shallow-first, so strict improvement keeps ties shallow.
    static constexpr std::array<TreeStructure, kNumTreeStructures> kByDepth = {
        TreeStructure::kNoSplit, TreeStructure::kSplitEthnicity, TreeStructure::kSplitGender,
        TreeStructure::kSplitAge, TreeStructure::kSplitAll};
    TreeStructure best = TreeStructure::kNoSplit;
    double best_loss = penalized_loss(best);
    for (TreeStructure s : kByDepth) {
      const double loss = penalized_loss(s);
      if (loss < best_loss - 1e-12) {
        best = s;
        best_loss = loss;
      }
    }
    return best;
  }

  ExpertiseTreeParams params_;
  std::vector<MetaCmab> leaves_;
  std::array<double, 7> losses_{};
  std::size_t rounds_ = 0;
  TreeStructure active_ = TreeStructure::kNoSplit;
};

}  // namespace cdm
