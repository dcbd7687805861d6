#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cdm/aggregators/exp4.hpp"
#include "cdm/aggregators/expertise_tree.hpp"
#include "cdm/aggregators/majority.hpp"
#include "cdm/aggregators/metacmab.hpp"
#include "cdm/error.hpp"

namespace cdm {

enum class AlgorithmKind { kRandomExpert, kMajorityVote, kConfidenceVote, kExp4, kMetaCmab,
                           kExpertiseTree };

inline std::optional<AlgorithmKind> parse_algorithm_kind(std::string_view name) {
  if (name == "random" || name == "random_expert") return AlgorithmKind::kRandomExpert;
  if (name == "mv") return AlgorithmKind::kMajorityVote;
  if (name == "cwmv" || name == "wmv") return AlgorithmKind::kConfidenceVote;
  if (name == "exp4") return AlgorithmKind::kExp4;
  if (name == "metacmab") return AlgorithmKind::kMetaCmab;
  if (name == "etree" || name == "expertisetree") return AlgorithmKind::kExpertiseTree;
  return std::nullopt;
}

inline std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::kRandomExpert: return "random";
    case AlgorithmKind::kMajorityVote: return "mv";
    case AlgorithmKind::kConfidenceVote: return "cwmv";
    case AlgorithmKind::kExp4: return "exp4";
    case AlgorithmKind::kMetaCmab: return "metacmab";
    case AlgorithmKind::kExpertiseTree: return "etree";
  }
  return "?";
}

// An algorithm plus its hyperparameters. `label` names it in outputs and in
// seed derivation, so it must be unique within a campaign.
struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::kConfidenceVote;
  std::string label;
  std::optional<double> gamma;  // EXP4; default is the finite-horizon tuning
  MetaCmabParams cmab;          // MetaCMAB and ExpertiseTree leaves
  double penalty_scale = 5.0;  // ExpertiseTree
  std::optional<double> penalty;

  static AlgorithmSpec named(std::string_view name) {
    auto kind = parse_algorithm_kind(name);
    if (!kind) throw ValidationError("unknown algorithm '" + std::string(name) + "'");
    AlgorithmSpec s;
    s.kind = *kind;
    s.label = std::string(to_string(*kind));
    return s;
  }
};

using AnyAggregator =
    std::variant<RandomExpert, MajorityVote, ConfidenceWeightedVote, Exp4, MetaCmab, ExpertiseTree>;

inline AnyAggregator make_aggregator(const AlgorithmSpec& spec, std::size_t experts,
                                     std::size_t arms, std::size_t horizon) {
  switch (spec.kind) {
    case AlgorithmKind::kRandomExpert: return RandomExpert{};
    case AlgorithmKind::kMajorityVote: return MajorityVote{};
    case AlgorithmKind::kConfidenceVote: return ConfidenceWeightedVote{};
    case AlgorithmKind::kExp4:
      return Exp4(experts, spec.gamma.value_or(default_exp4_gamma(experts, arms, horizon)));
    case AlgorithmKind::kMetaCmab: return MetaCmab(experts, spec.cmab);
    case AlgorithmKind::kExpertiseTree: {
      ExpertiseTreeParams p;
      p.leaf = spec.cmab;
      p.penalty_scale = spec.penalty_scale;
      p.penalty = spec.penalty;
      return ExpertiseTree(experts, p);
    }
  }
  throw ValidationError("unhandled algorithm kind");
}

// Adapter so that AnyAggregator itself satisfies the Aggregator concept.
class DynamicAggregator {
 public:
  explicit DynamicAggregator(AnyAggregator impl) : impl_(std::move(impl)) {}

  std::string_view name() const {
    return std::visit([](const auto& a) { return a.name(); }, impl_);
  }
  Decision decide(const AdviceMatrix& advice, Rng& rng) {
    return std::visit([&](auto& a) { return a.decide(advice, rng); }, impl_);
  }
  void update(const AdviceMatrix& advice, std::size_t chosen, double reward) {
    std::visit([&](auto& a) { a.update(advice, chosen, reward); }, impl_);
  }

  const AnyAggregator& get() const { return impl_; }

  // Active ExpertiseTree structure, if this is an ExpertiseTree.
  std::optional<TreeStructure> structure() const {
    if (auto* t = std::get_if<ExpertiseTree>(&impl_)) return t->structure();
    return std::nullopt;
  }

 private:
  AnyAggregator impl_;
};

static_assert(Aggregator<MajorityVote>);
static_assert(Aggregator<ConfidenceWeightedVote>);
static_assert(Aggregator<RandomExpert>);
static_assert(Aggregator<Exp4>);
static_assert(Aggregator<MetaCmab>);
static_assert(Aggregator<ExpertiseTree>);
static_assert(Aggregator<DynamicAggregator>);

}  // namespace cdm
