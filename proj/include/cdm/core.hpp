#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cdm/error.hpp"

namespace cdm {

// -- Identifiers --------------------------------------------------------------

template <class Tag>
struct Id {
  std::string value;

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;
};

struct HeadlineTag {};
struct ParticipantTag {};
struct PairTag {};
using HeadlineId = Id<HeadlineTag>;
using ParticipantId = Id<ParticipantTag>;
using PairId = Id<PairTag>;

// -- Enumerations -------------------------------------------------------------

enum class Category : std::uint8_t { kGender = 0, kEthnicity = 1, kAge = 2 };
inline constexpr std::array<Category, 3> kCategories = {Category::kGender, Category::kEthnicity,
                                                        Category::kAge};

enum class Sentiment : std::uint8_t { kPositive = 0, kNegative = 1 };
inline constexpr std::array<Sentiment, 2> kSentiments = {Sentiment::kPositive,
                                                         Sentiment::kNegative};

enum class Gender : std::uint8_t { kMale, kFemale, kOther, kNA };

enum class AgeGroup : std::uint8_t { kUnder35, kOver35, kNA };

inline constexpr int kAgeSplit = 35;
inline constexpr int kHeadlinesPerTreatment = 48;
inline constexpr int kNumTreatments = 5;

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::kGender: return "gender";
    case Category::kEthnicity: return "ethnicity";
    case Category::kAge: return "age";
  }
  return "?";
}

inline std::string_view to_string(Sentiment s) {
  return s == Sentiment::kPositive ? "positive" : "negative";
}

inline std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::kMale: return "male";
    case Gender::kFemale: return "female";
    case Gender::kOther: return "other";
    case Gender::kNA: return "NA";
  }
  return "?";
}

inline std::string_view to_string(AgeGroup g) {
  switch (g) {
    case AgeGroup::kUnder35: return "<35";
    case AgeGroup::kOver35: return ">=35";
    case AgeGroup::kNA: return "NA";
  }
  return "?";
}

inline std::optional<Category> parse_category(std::string_view token) {
  const std::string t = lower(token);
  if (t == "gender") return Category::kGender;
  if (t == "ethnicity") return Category::kEthnicity;
  if (t == "age") return Category::kAge;
  return std::nullopt;
}

inline std::optional<Sentiment> parse_sentiment(std::string_view token) {
  const std::string t = lower(token);
  if (t == "positive") return Sentiment::kPositive;
  if (t == "negative") return Sentiment::kNegative;
  return std::nullopt;
}

// Blank and "NA"-like tokens are kept as an explicit NA value.
inline Gender parse_gender(std::string_view token) {
  const std::string t = lower(token);
  if (t.empty() || t == "na" || t == "n/a" || t == "data_expired" || t == "consent_revoked")
    return Gender::kNA;
  if (t == "male" || t == "man" || t == "m") return Gender::kMale;
  if (t == "female" || t == "woman" || t == "f") return Gender::kFemale;
  return Gender::kOther;
}

inline bool is_na_token(std::string_view token) {
  const std::string t = lower(token);
  return t.empty() || t == "na" || t == "n/a" || t == "data_expired" ||
         t == "consent_revoked";
}

inline AgeGroup age_group(std::optional<int> age) {
  if (!age) return AgeGroup::kNA;
  return *age < kAgeSplit ? AgeGroup::kUnder35 : AgeGroup::kOver35;
}

// -- Records ------------------------------------------------------------------

struct Headline {
  HeadlineId id;
  int treatment = 0;  // 1..5
  std::string text;
  Category category = Category::kGender;
  Sentiment sentiment = Sentiment::kPositive;
  bool genuine = true;
  PairId pair_id;

  friend bool operator==(const Headline&, const Headline&) = default;

  // Ground truth y(h): 1 for genuine headlines, 0 for altered ones.
  int truth() const { return genuine ? 1 : 0; }
};

struct Participant {
  ParticipantId id;
  int treatment = 0;
  std::optional<int> age;
  Gender gender = Gender::kNA;
  std::optional<std::string> ethnicity;  // nullopt = NA
  bool ethnic_majority = false;          // derived: ethnicity == modal group

  friend bool operator==(const Participant&, const Participant&) = default;

  AgeGroup age_group() const { return cdm::age_group(age); }
};

struct ResponseRecord {
  std::size_t participant = 0;  // index into Dataset::participants()
  std::size_t headline = 0;     // index into Dataset::headlines()
  int raw_level = 3;            // 1 = very unlikely ... 5 = very likely
  int position = 0;
  std::int64_t response_time_ms = 0;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

// -- Response mapping and scoring ---------------------------------------------

inline constexpr std::array<double, 5> kResponseGrid = {0.0, 0.25, 0.5, 0.75, 1.0};

// 1 -> 0, 2 -> 0.25, 3 -> 0.5, 4 -> 0.75, 5 -> 1.
inline double map_response(int raw_level) {
  if (raw_level < 1 || raw_level > 5)
    throw ValidationError("response level out of range 1..5: " + std::to_string(raw_level));
  return kResponseGrid[static_cast<std::size_t>(raw_level - 1)];
}

// Absolute error between a probability and the 0/1 truth.
inline double response_error(double p, int truth) { return std::fabs(p - truth); }

inline double response_accuracy(double p, int truth) { return 1.0 - response_error(p, truth); }

// Thresholded decision reward: 1 if the probability points at the truth,
// 0 if it points away, 0.5 for an undecided response.
inline double decision_reward(double p, int truth) {
  if (std::fabs(p - 0.5) <= 1e-12) return 0.5;
  return ((p > 0.5) == (truth == 1)) ? 1.0 : 0.0;
}

}  // namespace cdm
