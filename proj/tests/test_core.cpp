#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"

using namespace cdm;

// -- response mapping ---------------------------------------------------------

TEST(MapResponse, FivePointGrid) {
  EXPECT_EQ(map_response(1), 0.0);
  EXPECT_EQ(map_response(2), 0.25);
  EXPECT_EQ(map_response(3), 0.5);
  EXPECT_EQ(map_response(4), 0.75);
  EXPECT_EQ(map_response(5), 1.0);
  for (int l = 1; l < 5; ++l) EXPECT_LT(map_response(l), map_response(l + 1));
}

TEST(MapResponse, RejectsOutOfRange) {
  EXPECT_THROW(map_response(0), ValidationError);
  EXPECT_THROW(map_response(6), ValidationError);
}

TEST(ResponseError, Examples) {
  EXPECT_EQ(response_error(0.75, 0), 0.75);
  EXPECT_EQ(response_error(1.0, 1), 0.0);
  EXPECT_EQ(response_accuracy(1.0, 1), 1.0);
  EXPECT_EQ(response_error(0.5, 0), 0.5);
  EXPECT_EQ(response_error(0.5, 1), 0.5);
}

TEST(ResponseError, LabelFlipSymmetry) {
  for (double p : kResponseGrid)
    for (int y : {0, 1}) EXPECT_EQ(response_error(p, y), response_error(1.0 - p, 1 - y));
}

TEST(DecisionReward, ThresholdsAtHalf) {
  EXPECT_EQ(decision_reward(0.75, 1), 1.0);
  EXPECT_EQ(decision_reward(0.75, 0), 0.0);
  EXPECT_EQ(decision_reward(0.25, 0), 1.0);
  EXPECT_EQ(decision_reward(0.5, 1), 0.5);
}

TEST(Demographics, GenderTokensAndAgeGroups) {
  EXPECT_EQ(parse_gender("Male"), Gender::kMale);
  EXPECT_EQ(parse_gender("woman"), Gender::kFemale);
  EXPECT_EQ(parse_gender(""), Gender::kNA);
  EXPECT_EQ(parse_gender("DATA_EXPIRED"), Gender::kNA);
  EXPECT_EQ(parse_gender("nonbinary"), Gender::kOther);
  EXPECT_EQ(age_group(34), AgeGroup::kUnder35);
  EXPECT_EQ(age_group(35), AgeGroup::kOver35);
  EXPECT_EQ(age_group(std::nullopt), AgeGroup::kNA);
}

// -- csv ----------------------------------------------------------------------

TEST(Csv, QuotedFieldsAndLineNumbers) {
  const auto recs = csv::parse("a,b\r\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n3,4");
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(recs[1].fields[0], "x, y");
  EXPECT_EQ(recs[1].fields[1], "he said \"hi\"");
  EXPECT_EQ(recs[2].fields[0], "multi\nline");
  EXPECT_EQ(recs[2].line, 3u);
  EXPECT_EQ(recs[3].line, 5u);
}

TEST(Csv, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(csv::parse("a\n\"oops\n"), ValidationError);
}

TEST(Csv, EscapeRoundTrips) {
  const std::string nasty = "a,\"b\"\nc";
  const auto recs = csv::parse(csv::escape(nasty) + "," + csv::escape("plain") + "\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].fields[0], nasty);
  EXPECT_EQ(recs[0].fields[1], "plain");
}

TEST(Csv, FieldCountMismatchNamesRow) {
  try {
    csv::Table t(csv::parse("a,b\n1,2\n3\n"), "f.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
}

// -- dataset ------------------------------------------------------------------

namespace {

struct Files {
  fixtures::TempDir dir{"core"};
  std::string headlines = dir / "headlines.csv";
  std::string responses = dir / "responses.csv";
};

Files write(const Dataset& d) {
  Files f;
  write_dataset(d, f.headlines, f.responses);
  return f;
}

std::string read(const std::string& p) { return csv::read_file(p); }

}  // namespace

TEST(Dataset, TwoParticipantsGiveNinetySixResponses) {
  const Dataset d = fixtures::scripted(2, fixtures::perfect, {}, 1);
  EXPECT_EQ(d.participants().size(), 2u);
  EXPECT_EQ(d.responses().size(), 96u);
  const Files f = write(d);
  const Dataset back = load_dataset(f.headlines, f.responses);
  EXPECT_EQ(back.responses().size(), 96u);
  EXPECT_TRUE(back == d);
}

TEST(Dataset, LoadingIsIdempotent) {
  const Dataset d = fixtures::scripted(3, [](std::size_t p, const Headline& h) {
    return static_cast<int>((p * 7 + h.id.value.size()) % 5) + 1;
  });
  const Files f = write(d);
  const Dataset a = load_dataset(f.headlines, f.responses);
  const Dataset b = load_dataset(f.headlines, f.responses);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.provenance(), b.provenance());
  EXPECT_EQ(a.provenance().headline_hash.size(), 16u);
}

TEST(Dataset, UnknownHeadlineNamesTheRow) {
  const Dataset d = fixtures::scripted(1, fixtures::perfect, {}, 1);
  Files f = write(d);
  std::string text = read(f.responses);
  // second data row -> physical line 3
  auto first = text.find('\n');
  auto second = text.find('\n', first + 1);
  auto line3 = text.substr(second + 1, text.find('\n', second + 1) - second - 1);
  auto fields = csv::parse(line3)[0].fields;
  const std::string bad = fields[0] + "," + fields[1] + ",nope," + fields[3] + "," + fields[4] + "," + fields[5] +
                          "," + fields[6] + "," + fields[7] + "," + fields[8];
  text.replace(second + 1, line3.size(), bad);
  fixtures::write_text(f.responses, text);
  try {
    load_dataset(f.headlines, f.responses);
    FAIL() << "expected a referential-integrity error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
}

TEST(Dataset, DuplicateResponseRejected) {
  const Dataset d = fixtures::scripted(1, fixtures::perfect, {}, 1);
  Files f = write(d);
  std::string text = read(f.responses);
  const auto first = text.find('\n');
  const auto second = text.find('\n', first + 1);
  text += text.substr(first + 1, second - first);
  fixtures::write_text(f.responses, text);
  EXPECT_THROW(load_dataset(f.headlines, f.responses), ValidationError);
}

TEST(Dataset, MissingColumnAndBadTokens) {
  const Dataset d = fixtures::scripted(1, fixtures::perfect, {}, 1);
  Files f = write(d);
  std::string h = read(f.headlines);
  std::string broken = h;
  broken.replace(broken.find("sentiment"), 9, "mood");
  fixtures::write_text(f.headlines, broken);
  EXPECT_THROW(load_dataset(f.headlines, f.responses), ValidationError);

  broken = h;
  broken.replace(broken.find(",gender,"), 8, ",religion,");
  fixtures::write_text(f.headlines, broken);
  try {
    load_dataset(f.headlines, f.responses);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("religion"), std::string::npos);
    EXPECT_GT(e.row(), 1u);
  }
}

TEST(Dataset, AliasesMapForeignHeaders) {
  const Dataset d = fixtures::scripted(1, fixtures::perfect, {}, 1);
  Files f = write(d);
  std::string r = read(f.responses);
  r.replace(r.find("raw_level"), 9, "answer");
  fixtures::write_text(f.responses, r);
  EXPECT_THROW(load_dataset(f.headlines, f.responses), ValidationError);
  SchemaAliases a;
  a.response_columns["answer"] = "raw_level";
  EXPECT_EQ(load_dataset(f.headlines, f.responses, a).responses().size(), 48u);
}

TEST(Dataset, NaDemographicsPreserved) {
  const Dataset d = fixtures::scripted(2, fixtures::perfect, [](std::size_t i, Participant& p) {
    if (i == 1) {
      p.age.reset();
      p.gender = Gender::kNA;
      p.ethnicity.reset();
    }
  }, 1);
  const Files f = write(d);
  const Dataset back = load_dataset(f.headlines, f.responses);
  const auto& p = back.participants()[*back.participant_index(ParticipantId{"p1"})];
  EXPECT_FALSE(p.age.has_value());
  EXPECT_EQ(p.gender, Gender::kNA);
  EXPECT_FALSE(p.ethnicity.has_value());
  EXPECT_FALSE(p.ethnic_majority);
}

TEST(Dataset, ModalEthnicityComputedFromData) {
  const Dataset d = fixtures::scripted(3, fixtures::perfect, [](std::size_t i, Participant& p) {
    p.ethnicity = i % 3 == 0 ? "Blue" : "Green";
  });
  ASSERT_TRUE(d.modal_ethnicity());
  EXPECT_EQ(*d.modal_ethnicity(), "Green");
  EXPECT_FALSE(d.participants()[0].ethnic_majority);
  EXPECT_TRUE(d.participants()[1].ethnic_majority);
}

TEST(Balance, AcceptsQuestionnaireLayout) {
  EXPECT_NO_THROW(validate_headlines(synth::make_headlines()));
}

TEST(Balance, RejectsBrokenCell) {
  auto hs = synth::make_headlines();
  // flip one genuine headline's category: its cell now has 7, another 9
  for (auto& h : hs)
    if (h.treatment == 1 && h.category == Category::kGender && h.genuine) {
      h.category = Category::kAge;
      break;
    }
  EXPECT_THROW(validate_headlines(hs), ValidationError);
}

TEST(Balance, RejectsPairInOneTreatment) {
  auto hs = synth::make_headlines();
  for (auto& h : hs)
    if (h.pair_id.value == "pgen0" && !h.genuine) h.treatment = 1;
  EXPECT_THROW(validate_headlines(hs), ValidationError);
}

TEST(TreatmentView, MapsProbabilities) {
  const Dataset d = fixtures::scripted(2, [](std::size_t p, const Headline&) { return p % 2 == 0 ? 4 : 2; });
  const TreatmentView v(d, 3);
  EXPECT_EQ(v.num_headlines(), 48u);
  EXPECT_EQ(v.num_participants(), 2u);
  for (std::size_t j = 0; j < 48; ++j) {
    EXPECT_EQ(v.probability(0, j), 0.75);
    EXPECT_EQ(v.probability(1, j), 0.25);
    EXPECT_EQ(v.truth(j), d.headlines()[v.headlines()[j]].genuine ? 1 : 0);
  }
}

TEST(Seeds, MixSeedIsOrderSensitiveAndStable) {
  EXPECT_NE(mix_seed({1, 2}), mix_seed({2, 1}));
  EXPECT_EQ(mix_seed({1, 2, 3}), mix_seed({1, 2, 3}));
  EXPECT_EQ(hash_string(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(RngTest, UniformRangeAndDeterminism) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
}
