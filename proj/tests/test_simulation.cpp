#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cdm;
using namespace cdm::sim;

namespace {

// Picks the arm whose claim is true; label rounds put the "genuine" claim first.
struct Oracle {
  const TreatmentView* view;
  Decision decide(const AdviceMatrix& adv, Rng&) {
    Decision d;
    d.scores.assign(adv.arms(), 0.0);
    if (adv.arms() == 2 && adv.arm_info(0).headline == adv.arm_info(1).headline) {
      d.chosen = view->truth(adv.arm_info(0).headline) == 1 ? 0 : 1;
    } else {
      for (std::size_t a = 0; a < adv.arms(); ++a)
        if (view->truth(adv.arm_info(a).headline) == 1) d.chosen = a;
    }
    d.scores[d.chosen] = 1.0;
    d.predictions = d.scores;
    return d;
  }
  void update(const AdviceMatrix&, std::size_t, double) {}
  std::string_view name() const { return "oracle"; }
};

// Plays member `who`'s own argmax, first arm on ties.
struct Follow {
  std::size_t who;
  Decision decide(const AdviceMatrix& adv, Rng&) {
    Decision d;
    const auto row = adv.row(who);
    d.scores.assign(row.begin(), row.end());
    d.predictions = d.scores;
    d.chosen = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    return d;
  }
  void update(const AdviceMatrix&, std::size_t, double) {}
  std::string_view name() const { return "follow"; }
};

const Dataset& population() {
  static const Dataset d = synth::generate(synth::heterogeneous_preset(3)).dataset;
  return d;
}

GroupRounds group_of(const TreatmentView& v, std::size_t n, EvaluationMode mode, std::size_t arms,
                     std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.mode = mode;
  cfg.arms = arms;
  return sample_group(v, cfg, SeedTuple{seed, v.treatment(), n, 0});
}

std::string metrics_csv(const SimulationConfig& cfg, const Dataset& d) {
  std::ostringstream out;
  compute_metrics(run_campaign(cfg, d)).write_csv(out);
  return out.str();
}

}  // namespace

// -- rounds -------------------------------------------------------------------

TEST(Rounds, LabelModeCoversEveryHeadlineOnce) {
  TreatmentView v(population(), 2);
  Rng rng(1);
  const auto plan = build_rounds(v, EvaluationMode::kLabel, 2, rng);
  ASSERT_EQ(plan.rounds.size(), 48u);
  EXPECT_EQ(plan.headlines_per_round(), 1u);
  std::set<std::size_t> seen;
  for (const auto& r : plan.rounds) {
    ASSERT_EQ(r.arms.size(), 2u);
    EXPECT_EQ(r.arms[0].headline, r.arms[1].headline);
    EXPECT_TRUE(r.arms[0].claims_genuine);
    EXPECT_FALSE(r.arms[1].claims_genuine);
    // exactly one of the two claims is right
    EXPECT_EQ(arm_reward(v, r.arms[0]) + arm_reward(v, r.arms[1]), 1.0);
    seen.insert(r.arms[0].headline);
  }
  EXPECT_EQ(seen.size(), 48u);
}

TEST(Rounds, HeadlineModeBalancedPairs) {
  TreatmentView v(population(), 1);
  for (std::size_t k : {2u, 4u, 48u}) {
    Rng rng(k);
    const auto plan = build_rounds(v, EvaluationMode::kHeadlineSelection, k, rng);
    ASSERT_EQ(plan.rounds.size(), 48u / k);
    std::set<std::size_t> seen;
    for (const auto& r : plan.rounds) {
      ASSERT_EQ(r.arms.size(), k);
      double good = 0;
      for (const auto& a : r.arms) {
        EXPECT_TRUE(a.claims_genuine);
        good += arm_reward(v, a);
        seen.insert(a.headline);
      }
      EXPECT_EQ(good, static_cast<double>(k / 2));
    }
    EXPECT_EQ(seen.size(), 48u);
  }
}

TEST(Rounds, HeadlineModeOddKAndBadK) {
  TreatmentView v(population(), 1);
  Rng rng(2);
  const auto plan = build_rounds(v, EvaluationMode::kHeadlineSelection, 3, rng);
  EXPECT_EQ(plan.rounds.size(), 16u);
  EXPECT_EQ(plan.headlines_per_round(), 3u);
  EXPECT_THROW(build_rounds(v, EvaluationMode::kHeadlineSelection, 5, rng), ValidationError);
  EXPECT_THROW(parse_mode("bogus"), ValidationError);
}

TEST(Rounds, AdviceFlipsForAlteredClaim) {
  TreatmentView v(population(), 3);
  Rng rng(3);
  const auto plan = build_rounds(v, EvaluationMode::kLabel, 2, rng);
  std::vector<std::size_t> members = {0, 5, 9};
  const auto adv = assemble_advice(v, members, plan.rounds[0]);
  for (std::size_t n = 0; n < 3; ++n) {
    const double p = v.probability(members[n], plan.rounds[0].arms[0].headline);
    EXPECT_EQ(adv(n, 0), p);
    EXPECT_EQ(adv(n, 1), 1.0 - p);
  }
}

// -- member outcomes and regret -------------------------------------------------

TEST(Regret, TieRule) {
  EXPECT_EQ(tie_reward(true, false), 1.0);
  EXPECT_EQ(tie_reward(false, true), 0.0);
  EXPECT_EQ(tie_reward(true, true), 0.5);
}

TEST(Regret, UndecidedMembersScoreHalf) {
  const auto d = fixtures::scripted(4, [](std::size_t, const Headline&) { return 3; }, {}, 1);
  TreatmentView v(d, 1);
  const auto g = group_of(v, 4, EvaluationMode::kLabel, 2, 1);
  for (const auto& row : g.outcomes.rewards)
    for (double r : row) EXPECT_EQ(r, 0.5);
  EXPECT_EQ(g.outcomes.best, 0u);  // all tied, lowest index
}

TEST(Regret, BestMemberIsHighestTotalLowestIndex) {
  // local participant 2 is perfect; 0, 1 and 3 are wrong on every third headline
  auto level = [](std::size_t p, const Headline& h) {
    const bool wrong = p != 2 && std::stoi(h.id.value.substr(1)) % 3 == 0;
    return (h.genuine != wrong) ? 5 : 1;
  };
  const auto d = fixtures::scripted(4, level, {}, 1);
  TreatmentView v(d, 1);
  const auto g = group_of(v, 4, EvaluationMode::kLabel, 2, 9);
  EXPECT_EQ(g.members[g.outcomes.best], 2u);
  EXPECT_EQ(g.outcomes.totals[g.outcomes.best], 48.0);
}

TEST(Regret, IdentityOnHundredReplicas) {
  for (std::size_t rep = 0; rep < 100; ++rep) {
    TreatmentView v(population(), static_cast<int>(1 + rep % 5));
    const auto mode = rep % 2 ? EvaluationMode::kLabel : EvaluationMode::kHeadlineSelection;
    const auto g = group_of(v, 2 + rep % 20, mode, 4, rep);
    const auto spec = AlgorithmSpec::named(rep % 3 == 0 ? "exp4" : rep % 3 == 1 ? "metacmab" : "etree");
    const auto r = run_algorithm(v, g, spec, SeedTuple{11, v.treatment(), g.members.size(), rep}, {});
    const double best = *std::max_element(g.outcomes.totals.begin(), g.outcomes.totals.end());
    EXPECT_EQ(r.best_total(), best);
    double sum = 0.0;
    for (std::size_t t = 0; t < r.rounds(); ++t) {
      EXPECT_EQ(r.regret(t), r.best_rewards[t] - r.rewards[t]);
      EXPECT_EQ(r.best_rewards[t], g.outcomes.rewards[r.best_member][t]);
      sum += r.regret(t);
    }
    // summed regret equals the gap in totals
    EXPECT_NEAR(sum, r.best_total() - r.total(), 1e-12);
    EXPECT_NEAR(r.mean_regret(), (r.best_total() - r.total()) / static_cast<double>(r.rounds()), 1e-12);
    const auto s = summarize(r);
    EXPECT_NEAR(s.mean_regret(), r.mean_regret(), 1e-12);
    EXPECT_EQ(s.terminal_regret(), r.terminal_regret());
  }
}

TEST(Regret, FollowingTheBestMemberHasZeroRegret) {
  // levels 1, 2, 4, 5 only: no member ever ties between the two label arms
  auto level = [](std::size_t p, const Headline& h) {
    static const int pattern[] = {1, 2, 4, 5};
    return pattern[(p * 7 + std::hash<std::string>{}(h.id.value)) % 4];
  };
  const auto d = fixtures::scripted(12, level);
  for (int t = 1; t <= 5; ++t) {
    TreatmentView v(d, t);
    const auto g = group_of(v, 8, EvaluationMode::kLabel, 2, static_cast<std::uint64_t>(t));
    Follow f{g.outcomes.best};
    Rng rng(0);
    const auto r = run_replica(v, g, f, rng);
    for (std::size_t k = 0; k < r.rounds(); ++k) EXPECT_EQ(r.regret(k), 0.0);
  }
}

TEST(Regret, OracleIsPerfect) {
  TreatmentView v(population(), 4);
  for (auto mode : {EvaluationMode::kLabel, EvaluationMode::kHeadlineSelection}) {
    const auto g = group_of(v, 6, mode, 4, 5);
    Oracle o{&v};
    Rng rng(0);
    const auto r = run_replica(v, g, o, rng);
    EXPECT_EQ(r.accuracy(), 1.0);
    for (std::size_t t = 0; t < r.rounds(); ++t) EXPECT_LE(r.regret(t), 0.0);
    // beats every member who made at least one mistake
    for (std::size_t q = 0; q < r.member_ranking.size(); ++q)
      EXPECT_EQ(r.beats(q), r.member_ranking[q] < static_cast<double>(r.rounds()));
  }
}

TEST(Regret, PerfectCrowdGivesPerfectAggregates) {
  const auto d = fixtures::scripted(10, fixtures::perfect);
  SimulationConfig cfg;
  cfg.sizes = {1, 3, 10};
  cfg.replicas = 4;
  const auto res = run_campaign(cfg, d);
  for (const auto& item : res.summaries)
    for (std::size_t a = 0; a < item.size(); ++a) {
      EXPECT_EQ(item[a].best_accuracy(), 1.0);
      if (cfg.algorithms[a].label != "random") continue;
      EXPECT_EQ(item[a].accuracy(), 1.0);  // any member is right
    }
  const auto table = compute_metrics(res);
  EXPECT_EQ(table.cell("cwmv", 10).accuracy.mean, 1.0);
  EXPECT_EQ(table.cell("cwmv", 10).terminal_regret.mean, 0.0);
}

// -- campaign -------------------------------------------------------------------

TEST(Campaign, CountsAndSharedGroups) {
  SimulationConfig cfg;
  cfg.sizes = {2, 4};
  cfg.replicas = 3;
  cfg.algorithms = {AlgorithmSpec::named("cwmv"), AlgorithmSpec::named("etree")};
  const auto res = run_campaign(cfg, population());
  EXPECT_EQ(res.summaries.size(), 5u * 2 * 3);
  EXPECT_EQ(res.replica_count(), 60u);
  for (const auto& item : res.summaries) {
    ASSERT_EQ(item.size(), 2u);
    EXPECT_EQ(item[0].best_total2, item[1].best_total2);
    EXPECT_EQ(item[0].rounds(), 48u);
    EXPECT_LT(item[0].structure, 0);
    EXPECT_GE(item[1].structure, 0);
  }
  const auto table = compute_metrics(res);
  const auto rows = table.rows();
  // 4 scalars + 2 x 48 curve points + N ranks (+ 5 structures for the tree)
  const std::size_t expect = 2 * (4 + 96) * 2 + (2 + 4) * 2 + 5 * 2;
  EXPECT_EQ(rows.size(), expect);
  EXPECT_EQ(table.cell("etree", 4).replicas, 15u);
  double share = 0;
  for (const auto& s : table.cell("etree", 2).structure_share) share += s.mean;
  EXPECT_NEAR(share, 1.0, 1e-12);
}

TEST(Campaign, HeadlineModeRoundColumns) {
  SimulationConfig cfg;
  cfg.sizes = {3};
  cfg.replicas = 2;
  cfg.mode = EvaluationMode::kHeadlineSelection;
  cfg.arms = 2;
  cfg.algorithms = {AlgorithmSpec::named("cwmv")};
  const auto rows = compute_metrics(run_campaign(cfg, population())).rows();
  std::size_t regret = 0, last_headline = 0;
  for (const auto& r : rows) {
    if (r.metric == "regret") ++regret;
    if (r.metric == "regret_headlines") last_headline = std::max(last_headline, *r.round);
  }
  EXPECT_EQ(regret, 24u);
  EXPECT_EQ(last_headline, 48u);

  cfg.arms = 48;
  const auto one = run_campaign(cfg, population());
  EXPECT_EQ(one.summaries[0][0].rounds(), 1u);
}

TEST(Campaign, AddingAnAlgorithmLeavesOthersUnchanged) {
  SimulationConfig cfg;
  cfg.sizes = {6};
  cfg.replicas = 5;
  cfg.algorithms = {AlgorithmSpec::named("exp4")};
  const auto a = run_campaign(cfg, population());
  cfg.algorithms = {AlgorithmSpec::named("random"), AlgorithmSpec::named("exp4")};
  const auto b = run_campaign(cfg, population());
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    EXPECT_EQ(a.summaries[i][0].regret2, b.summaries[i][1].regret2);
    EXPECT_EQ(a.summaries[i][0].total2, b.summaries[i][1].total2);
  }
}

TEST(Campaign, ByteIdenticalAcrossWorkerCounts) {
  SimulationConfig cfg;
  cfg.sizes = {2, 8};
  cfg.replicas = 20;
  cfg.seed = 77;
  cfg.workers = 1;
  const std::string one = metrics_csv(cfg, population());
  cfg.workers = 4;
  EXPECT_EQ(one, metrics_csv(cfg, population()));
  cfg.workers = 8;
  EXPECT_EQ(one, metrics_csv(cfg, population()));
  cfg.seed = 78;
  EXPECT_NE(one, metrics_csv(cfg, population()));
}

TEST(Campaign, HorizonTruncates) {
  SimulationConfig cfg;
  cfg.sizes = {4};
  cfg.replicas = 2;
  cfg.horizon = 10;
  cfg.algorithms = {AlgorithmSpec::named("metacmab")};
  const auto res = run_campaign(cfg, population());
  EXPECT_EQ(res.summaries[0][0].rounds(), 10u);
}

TEST(Campaign, Validation) {
  SimulationConfig cfg;
  cfg.sizes = {41};
  try {
    cfg.validate(population());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds the 40 participants"), std::string::npos);
  }
  cfg.sizes = {4};
  cfg.treatments = {9};
  EXPECT_THROW(cfg.validate(population()), ValidationError);
  cfg.treatments = {};
  cfg.algorithms = {AlgorithmSpec::named("cwmv"), AlgorithmSpec::named("cwmv")};
  EXPECT_THROW(cfg.validate(population()), ValidationError);
  cfg.algorithms = default_algorithms();
  cfg.mode = EvaluationMode::kHeadlineSelection;
  cfg.arms = 7;
  EXPECT_THROW(cfg.validate(population()), ValidationError);
}

TEST(Campaign, FailuresNameTheSeedTuple) {
  SimulationConfig cfg;
  cfg.sizes = {2};
  cfg.replicas = 1;
  cfg.treatments = {1};
  cfg.algorithms = {AlgorithmSpec::named("cwmv")};
  cfg.algorithms[0].label = "broken";
  cfg.algorithms[0].cmab.ridge = -1.0;
  cfg.algorithms[0].kind = AlgorithmKind::kMetaCmab;
  try {
    run_campaign(cfg, population());
    FAIL();
  } catch (const CampaignError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("treatment=1"), std::string::npos);
    EXPECT_NE(what.find("algorithm=broken"), std::string::npos);
    EXPECT_EQ(e.seeds().replica, 0u);
  }
}

// -- win percentages ------------------------------------------------------------

TEST(WinPercentage, StrictlyBeatsRankedMembers) {
  // participant 0 of each treatment is perfect, the rest miss one headline in four,
  // never more than two of them on the same headline
  auto level = [](std::size_t p, const Headline& h) {
    const bool wrong = p % 6 != 0 && (std::stoul(h.id.value.substr(1)) + p) % 4 == 0;
    return (h.genuine != wrong) ? 5 : 1;
  };
  const auto d = fixtures::scripted(6, level);
  TreatmentView v(d, 2);
  const auto g = group_of(v, 6, EvaluationMode::kLabel, 2, 1);
  Oracle o{&v};
  Rng rng(0);
  const auto r = run_replica(v, g, o, rng);
  ASSERT_EQ(r.member_ranking.size(), 6u);
  EXPECT_EQ(r.member_ranking[0], 48.0);
  EXPECT_FALSE(r.beats(0));  // a tie is not a win
  for (std::size_t q = 1; q < 6; ++q) EXPECT_TRUE(r.beats(q));

  // campaign level: CWMV with the whole group matches the majority, which is always right
  SimulationConfig cfg;
  cfg.sizes = {6};
  cfg.replicas = 3;
  cfg.algorithms = {AlgorithmSpec::named("cwmv")};
  const auto res = run_campaign(cfg, d);
  const auto w = win_percentage(res, "cwmv");
  ASSERT_EQ(w.size(), 1u);
  ASSERT_EQ(w[0].size(), 6u);
  EXPECT_EQ(w[0][0], 0.0);
  for (std::size_t q = 1; q < 6; ++q) EXPECT_EQ(w[0][q], 1.0);
  EXPECT_THROW(win_percentage(res, "nope"), ValidationError);
}

TEST(Parallel, LowestFailingIndexWins) {
  for (std::size_t workers : {1u, 4u}) {
    try {
      parallel_for(100, workers, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      if (workers == 1) {
        EXPECT_STREQ(e.what(), "17");
      }
    }
  }
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 8, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::accumulate(hit.begin(), hit.end(), 0), 1000);
}
