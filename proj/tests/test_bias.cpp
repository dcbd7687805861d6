#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cdm;
using namespace cdm::bias;

namespace {

int hashed_level(std::size_t p, const Headline& h, std::uint64_t salt = 0) {
  Rng r(mix_seed({salt, p, hash_string(h.id.value)}));
  return 1 + static_cast<int>(r.below(5));
}

Dataset random_dataset(std::size_t per_treatment = 12, std::uint64_t salt = 0) {
  return fixtures::scripted(
      per_treatment, [salt](std::size_t p, const Headline& h) { return hashed_level(p, h, salt); },
      [](std::size_t p, Participant& who) {
        who.gender = p % 2 ? Gender::kFemale : Gender::kMale;
        who.age = p % 3 ? 25 : 50;
        who.ethnicity = p % 4 ? "A" : "B";
      });
}

HeadlineSamples constant_samples(const Dataset& d, double v, std::size_t n = 3) {
  HeadlineSamples s;
  s.source = "constant";
  s.values.assign(d.headlines().size(), std::vector<double>(n, v));
  return s;
}

}  // namespace

// -- framing ----------------------------------------------------------------------

TEST(Framing, QuadrantRules) {
  EXPECT_EQ(classify(0.2, 0.8), Quadrant::kQ1);
  EXPECT_EQ(classify(0.8, 0.8), Quadrant::kQ2);
  EXPECT_EQ(classify(0.8, 0.2), Quadrant::kQ3);
  EXPECT_EQ(classify(0.2, 0.2), Quadrant::kQ4);
  EXPECT_EQ(classify(0.5, 0.9), Quadrant::kBoundary);
  EXPECT_EQ(classify(0.1, 0.5), Quadrant::kBoundary);
  EXPECT_EQ(to_string(Quadrant::kBoundary), "boundary");
}

TEST(Framing, CommonKnowledgeCorner) {
  const auto d = fixtures::scripted(6, fixtures::perfect);
  const auto r = framing_analysis(d, raw_samples(d));
  ASSERT_EQ(r.points.size(), 120u);
  EXPECT_EQ(r.count(Quadrant::kQ3), 120u);
  for (const auto& p : r.points) {
    EXPECT_EQ(p.mean_original, 1.0);
    EXPECT_EQ(p.mean_altered, 0.0);
    EXPECT_NEAR(p.p_value, 2.0 / 924.0, 1e-12);  // 6 vs 6, fully separated
  }
  EXPECT_EQ(r.significant, 120u);
  EXPECT_EQ(r.framing_fraction(), 1.0);
}

TEST(Framing, ConstantHalfIsAllBoundary) {
  const auto d = random_dataset();
  const auto r = framing_analysis(d, constant_samples(d, 0.5));
  EXPECT_EQ(r.count(Quadrant::kBoundary), 120u);
  EXPECT_EQ(r.significant, 0u);

  // the same through a replay: every member always says 0.5
  const auto flat = fixtures::scripted(8, [](std::size_t, const Headline&) { return 3; });
  PredictionProtocol proto;
  proto.group_size = 4;
  proto.replicas = 3;
  const auto s = prediction_samples(flat, AlgorithmSpec::named("cwmv"), proto);
  for (const auto& v : s.values) EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(framing_analysis(flat, s).count(Quadrant::kBoundary), 120u);
}

TEST(Framing, CountsCoverEveryPairAndMirrorSwapsQuadrants) {
  const auto d = random_dataset(9, 4);
  const auto raw = raw_samples(d);
  auto mirrored = raw;
  for (auto& v : mirrored.values)
    for (double& x : v) x = 1.0 - x;
  const auto a = framing_analysis(d, raw);
  const auto b = framing_analysis(d, mirrored);
  std::size_t sum = 0;
  for (std::size_t q = 0; q < 5; ++q) sum += a.counts[q];
  EXPECT_EQ(sum, a.points.size());
  EXPECT_EQ(a.count(Quadrant::kQ2), b.count(Quadrant::kQ4));
  EXPECT_EQ(a.count(Quadrant::kQ4), b.count(Quadrant::kQ2));
  EXPECT_EQ(a.count(Quadrant::kQ1) + a.count(Quadrant::kQ3), b.count(Quadrant::kQ1) + b.count(Quadrant::kQ3));
  EXPECT_EQ(a.count(Quadrant::kQ1), b.count(Quadrant::kQ3));
  EXPECT_EQ(a.count(Quadrant::kBoundary), b.count(Quadrant::kBoundary));
  // swapping the axes instead exchanges Q1 and Q3 point by point
  for (const auto& p : a.points) {
    auto expect = p.quadrant;
    if (expect == Quadrant::kQ1) expect = Quadrant::kQ3;
    else if (expect == Quadrant::kQ3) expect = Quadrant::kQ1;
    EXPECT_EQ(classify(p.mean_altered, p.mean_original), expect);
  }
}

TEST(Framing, MissingObservationsNamed) {
  const auto d = random_dataset();
  auto s = raw_samples(d);
  s.values[1].clear();
  EXPECT_THROW(framing_analysis(d, s), ValidationError);
}

// -- group errors -------------------------------------------------------------------

TEST(GroupErrors, AllCorrectIsDegenerate) {
  const auto d = fixtures::scripted(5, fixtures::perfect);
  const auto t = group_error_table(d, raw_samples(d));
  ASSERT_EQ(t.cells.size(), 12u);
  for (const auto& c : t.cells) {
    EXPECT_EQ(c.mean_error, 0.0);
    EXPECT_EQ(c.errors.size(), 20u);
  }
  for (const auto& test : t.tests) {
    ASSERT_TRUE(test.omnibus);
    EXPECT_EQ(test.omnibus->p_value, 1.0);
    EXPECT_FALSE(test.omnibus->warning.empty());
    EXPECT_TRUE(test.posthoc.empty());
  }
}

TEST(GroupErrors, CellMeansMatchIndependentTabulation) {
  const auto d = random_dataset(10, 2);
  const auto t = group_error_table(d, raw_samples(d));
  // per-headline mean error, then mean over headlines, straight from the records
  std::map<std::size_t, std::pair<double, double>> per_headline;
  for (const auto& r : d.responses()) {
    auto& [sum, n] = per_headline[r.headline];
    sum += std::fabs((r.raw_level - 1) / 4.0 - d.headlines()[r.headline].truth());
    n += 1;
  }
  std::map<std::tuple<int, int, bool>, std::pair<double, double>> cell;
  for (const auto& [h, sn] : per_headline) {
    const auto& hl = d.headlines()[h];
    auto& [sum, n] = cell[{static_cast<int>(hl.category), static_cast<int>(hl.sentiment), hl.genuine}];
    sum += sn.first / sn.second;
    n += 1;
  }
  for (const auto& c : t.cells) {
    const auto& [sum, n] = cell[{static_cast<int>(c.category), static_cast<int>(c.sentiment), c.genuine}];
    EXPECT_NEAR(c.mean_error, sum / n, 1e-12);
    EXPECT_EQ(c.errors.size(), 20u);
  }
  for (const auto& test : t.tests) {
    std::vector<std::vector<double>> g;
    for (std::size_t i : test.cells) g.push_back(t.cells[i].errors);
    EXPECT_NEAR(test.omnibus->statistic, oracle::kruskal_h(g), 1e-10);
    EXPECT_EQ(*test.omnibus->df, 3);
  }
}

TEST(GroupErrors, InjectedBiasRaisesTheBiasedCell) {
  auto cfg = synth::homogeneous_preset(6);
  cfg.profiles[0].delta = {0.4, 0.4, 0.4};
  // credulous towards negative ethnicity headlines
  cfg.bias[static_cast<std::size_t>(Category::kEthnicity)][static_cast<std::size_t>(Sentiment::kNegative)] = 0.8;
  const auto d = synth::generate(cfg).dataset;
  const auto t = group_error_table(d, raw_samples(d));
  const auto& biased = t.cell(Category::kEthnicity, Sentiment::kNegative, false);
  const auto& mirror = t.cell(Category::kEthnicity, Sentiment::kPositive, false);
  EXPECT_GT(biased.mean_error, mirror.mean_error + 0.1);
  EXPECT_LT(t.cell(Category::kEthnicity, Sentiment::kNegative, true).mean_error,
            t.cell(Category::kEthnicity, Sentiment::kPositive, true).mean_error);
  EXPECT_LT(t.tests[1].omnibus->p_value, 0.05);
  EXPECT_FALSE(t.tests[1].posthoc.empty());
}

TEST(GroupErrors, EmptyCellsNoted) {
  const auto d = random_dataset();
  auto s = raw_samples(d);
  for (std::size_t h = 0; h < d.headlines().size(); ++h)
    if (d.headlines()[h].category == Category::kAge && !d.headlines()[h].genuine) s.values[h].clear();
  const auto t = group_error_table(d, s);
  EXPECT_EQ(t.tests[2].cells.size(), 2u);
  EXPECT_NE(t.tests[2].note.find("empty cell"), std::string::npos);
  EXPECT_TRUE(t.tests[2].omnibus.has_value());
}

TEST(HeadlineGee, ConstantErrorsPerClass) {
  // every class/authenticity cell gets its own constant error, so the fit is exact
  auto level = [](std::size_t, const Headline& h) {
    const int c = static_cast<int>(h.category);
    return h.genuine ? 5 - c : 1 + (c == 2 ? 0 : 1);
  };
  const auto d = fixtures::scripted(4, level);
  const auto m = headline_error_gee(d, raw_samples(d));
  // errors: genuine gender 0, ethnicity .25, age .5; altered gender .25, ethnicity .25, age 0
  EXPECT_NEAR(m.term("intercept").estimate, 0.0, 1e-10);
  EXPECT_NEAR(m.term("class_ethnicity").estimate, 0.25, 1e-10);
  EXPECT_NEAR(m.term("class_gender").estimate, 0.25, 1e-10);
  EXPECT_NEAR(m.term("genuine").estimate, 0.5, 1e-10);
  EXPECT_NEAR(m.term("class_ethnicity:genuine").estimate, -0.5, 1e-10);
  EXPECT_NEAR(m.term("class_gender:genuine").estimate, -0.75, 1e-10);
  EXPECT_EQ(m.clusters, 120u);
}

// -- demographics ---------------------------------------------------------------------

TEST(Demographics, IdenticalResponsesGiveNoEffect) {
  auto level = [](std::size_t, const Headline& h) { return hashed_level(0, h); };
  const auto d = fixtures::scripted(8, level, [](std::size_t p, Participant& who) {
    who.gender = p % 2 ? Gender::kFemale : Gender::kMale;
    who.age = p % 4 < 2 ? 20 : 60;
  });
  const auto rep = demographic_performance(d);
  const auto& c = rep.cell(Split::kGender, Category::kAge);
  EXPECT_DOUBLE_EQ(c.accuracy[0], c.accuracy[1]);
  ASSERT_TRUE(c.effect);
  EXPECT_NEAR(c.effect->estimate, 0.0, 1e-12);
  EXPECT_NEAR(c.effect->p_value, 1.0, 1e-9);
  EXPECT_EQ(c.participants[0], 20u);
  // everyone shares one ethnicity: that split is skipped with a warning
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("ethnicity"), std::string::npos);
  EXPECT_THROW(rep.cell(Split::kEthnicity, Category::kAge), ValidationError);
}

TEST(Demographics, GroupAccuracyByTabulation) {
  const auto d = random_dataset(10, 8);
  const auto rep = demographic_performance(d);
  for (Split s : kSplits)
    for (Category c : kCategories) {
      std::array<double, 2> sum{}, n{};
      for (const auto& r : d.responses()) {
        const auto& h = d.headlines()[r.headline];
        const auto g = split_group(d.participants()[r.participant], s);
        if (h.category != c || !g) continue;
        sum[*g] += 1.0 - std::fabs((r.raw_level - 1) / 4.0 - h.truth());
        n[*g] += 1;
      }
      const auto& cell = rep.cell(s, c);
      for (int g = 0; g < 2; ++g) EXPECT_NEAR(cell.accuracy[g], sum[g] / n[g], 1e-12);
      // the indicator coefficient is the difference in means when every cluster is one group
      EXPECT_NEAR(cell.effect->estimate, cell.accuracy[1] - cell.accuracy[0], 1e-8);
      EXPECT_NEAR(cell.effect->p_adjusted, std::min(1.0, 3 * cell.effect->p_value), 1e-15);
    }
}

TEST(Demographics, SplitGroups) {
  Participant p;
  p.gender = Gender::kOther;
  EXPECT_FALSE(split_group(p, Split::kGender));
  p.age = 35;
  EXPECT_EQ(split_group(p, Split::kAge), 1);
  p.age = 34;
  EXPECT_EQ(split_group(p, Split::kAge), 0);
  p.age.reset();
  EXPECT_FALSE(split_group(p, Split::kAge));
}

// -- calibration and timing --------------------------------------------------------------

TEST(Calibration, ConfidentMeansMoreAccurate) {
  auto cfg = synth::homogeneous_preset(2);
  cfg.profiles[0].delta = {0.6, 0.6, 0.6};
  const auto rep = confidence_calibration(synth::generate(cfg).dataset);
  EXPECT_EQ(rep.buckets[0].accuracy, 0.5);  // undecided
  EXPECT_GT(rep.buckets[1].accuracy, rep.buckets[0].accuracy);
  EXPECT_GT(rep.buckets[2].accuracy, rep.buckets[1].accuracy);
  for (const auto& g : rep.groups) EXPECT_NEAR(g.frequency[0] + g.frequency[1] + g.frequency[2], 1.0, 1e-12);
}

TEST(Calibration, AllUndecided) {
  const auto d = fixtures::scripted(3, [](std::size_t, const Headline&) { return 3; });
  const auto rep = confidence_calibration(d);
  EXPECT_EQ(rep.buckets[0].count, d.responses().size());
  EXPECT_EQ(rep.buckets[0].accuracy, 0.5);
  EXPECT_EQ(rep.buckets[1].count + rep.buckets[2].count, 0u);
  EXPECT_EQ(confidence_level(0.0), 2u);
  EXPECT_EQ(confidence_level(0.75), 1u);
}

TEST(Votes, ConfidentMinorityOutvotesHesitantMajority) {
  // per treatment: two sure and right, three leaning the wrong way
  const auto d = fixtures::scripted(5, [](std::size_t p, const Headline& h) {
    const bool sure = p % 5 < 2;
    return h.genuine ? (sure ? 5 : 2) : (sure ? 1 : 4);
  });
  const auto v = crowd_votes(d);
  ASSERT_EQ(v.mv.size(), 240u);
  EXPECT_EQ(v.mv_accuracy(), 0.0);
  EXPECT_EQ(v.cwmv_accuracy(), 1.0);
  ASSERT_TRUE(v.wilcoxon);
  EXPECT_LT(v.wilcoxon->p_value, 1e-10);

  const auto tied = crowd_votes(fixtures::scripted(2, [](std::size_t p, const Headline&) { return p % 2 ? 5 : 1; }));
  EXPECT_EQ(tied.mv_accuracy(), 0.5);
  EXPECT_EQ(tied.cwmv_accuracy(), 0.5);
  EXPECT_FALSE(tied.wilcoxon);
}

TEST(Votes, MatchesGroupVotesOverWholeTreatments) {
  const auto d = synth::generate(synth::heterogeneous_preset(6)).dataset;
  const auto v = crowd_votes(d);
  double mv = 0.0, cw = 0.0;
  for (int t : d.treatments()) {
    TreatmentView view(d, t);
    std::vector<std::size_t> all(view.num_participants());
    std::iota(all.begin(), all.end(), 0);
    cw += cwmv_group_accuracy(view, all) / 5.0;
    for (std::size_t h = 0; h < view.num_headlines(); ++h) {
      sim::Round r;
      r.arms = {{h, true}, {h, false}};
      const auto s = mv_scores(sim::assemble_advice(view, all, r));
      const double right = view.truth(h) == 1 ? s[0] : s[1], wrong = view.truth(h) == 1 ? s[1] : s[0];
      mv += (right > wrong ? 1.0 : right == wrong ? 0.5 : 0.0) / 240.0;
    }
  }
  EXPECT_NEAR(v.cwmv_accuracy(), cw, 1e-12);
  EXPECT_NEAR(v.mv_accuracy(), mv, 1e-12);
}

TEST(Timing, MovingAverage) {
  const auto d = fixtures::scripted(2, fixtures::perfect, {}, 1);  // 96 responses
  const auto curve = response_time_curve(d, 10);
  ASSERT_EQ(curve.size(), 87u);
  for (const auto& p : curve) EXPECT_EQ(p.accuracy, 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GT(curve[i].time_ms, curve[i - 1].time_ms);
  EXPECT_EQ(response_time_curve(d, 96).size(), 1u);
  try {
    response_time_curve(d, 97);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds the 96 responses"), std::string::npos);
  }
  EXPECT_THROW(response_time_curve(d, 0), ValidationError);
}

// -- diversity ----------------------------------------------------------------------------

TEST(Diversity, IdenticalParticipantsCorrelateFully) {
  auto level = [](std::size_t, const Headline& h) { return hashed_level(1, h); };
  const auto d = fixtures::scripted(20, level, [](std::size_t p, Participant& who) {
    who.gender = p % 2 ? Gender::kFemale : Gender::kMale;
  });
  DiversityOptions o;
  o.groups_per_treatment = 5;
  const auto rep = diversity_analysis(d, o);
  EXPECT_NEAR(rep.men.mean(), 1.0, 1e-12);
  EXPECT_NEAR(rep.women.mean(), 1.0, 1e-12);
  EXPECT_NEAR(rep.between.mean(), 1.0, 1e-12);
  EXPECT_EQ(rep.men.pairs, 5u * 45);
  EXPECT_EQ(rep.between.pairs, 5u * 100);
  // identical members: every group has the same accuracy
  for (const auto& g : rep.groups) EXPECT_EQ(g.accuracy.size(), 25u);
  EXPECT_EQ(rep.groups[0].accuracy, rep.groups[2].accuracy);
  EXPECT_EQ(rep.women_vs_men->p_value, 1.0);
}

TEST(Diversity, IndependentResponsesUncorrelated) {
  const auto d = random_dataset(40, 11);
  DiversityOptions o;
  o.groups_per_treatment = 10;
  const auto rep = diversity_analysis(d, o);
  EXPECT_NEAR(rep.men.mean(), 0.0, 0.03);
  EXPECT_NEAR(rep.women.mean(), 0.0, 0.03);
  EXPECT_NEAR(rep.between.mean(), 0.0, 0.03);
  EXPECT_TRUE(rep.warnings.empty());
}

TEST(Diversity, SmallTreatmentsSkippedAndBadSizeRejected) {
  const auto d = random_dataset(6);
  const auto rep = diversity_analysis(d);
  EXPECT_EQ(rep.warnings.size(), 5u);
  EXPECT_FALSE(rep.women_vs_men);
  DiversityOptions o;
  o.group_size = 3;
  EXPECT_THROW(diversity_analysis(d, o), ValidationError);
}
