#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdm/core.hpp"
#include "cdm/csv.hpp"
#include "cdm/error.hpp"
#include "cdm/rng.hpp"

namespace cdm {

struct Provenance {
  std::string headline_source;
  std::string response_source;
  std::string headline_hash;  // FNV-1a 64 of the file bytes, hex
  std::string response_hash;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// -- Headline balance ---------------------------------------------------------

// Checks the questionnaire design: 48 headlines per treatment, 8 per
// (category x genuine) cell, 24 positive / 24 negative, and every pair made of
// one genuine and one altered headline placed in different treatments.
inline void validate_headlines(const std::vector<Headline>& headlines,
                               const std::string& source = "headlines") {
  std::map<int, std::vector<const Headline*>> by_treatment;
  std::map<PairId, std::vector<const Headline*>> by_pair;
  std::set<HeadlineId> seen;
  for (const Headline& h : headlines) {
    if (h.treatment < 1 || h.treatment > kNumTreatments)
      throw ValidationError(source + ": headline " + h.id.value + " has treatment " +
                            std::to_string(h.treatment) + " outside 1..5");
    if (!seen.insert(h.id).second)
      throw ValidationError(source + ": duplicate headline id " + h.id.value);
    by_treatment[h.treatment].push_back(&h);
    by_pair[h.pair_id].push_back(&h);
  }
  for (const auto& [treatment, hs] : by_treatment) {
    const std::string where = source + ": treatment " + std::to_string(treatment);
    if (hs.size() != kHeadlinesPerTreatment)
      throw ValidationError(where + " has " + std::to_string(hs.size()) +
                            " headlines, expected 48");
    int cells[3][2] = {};
    int positive = 0;
    for (const Headline* h : hs) {
      ++cells[static_cast<int>(h->category)][h->genuine ? 1 : 0];
      positive += h->sentiment == Sentiment::kPositive;
    }
    for (Category c : kCategories) {
      for (int g = 0; g < 2; ++g) {
        const int n = cells[static_cast<int>(c)][g];
        if (n != 8)
          throw ValidationError(where + " has " + std::to_string(n) + " " +
                                (g ? "genuine " : "altered ") + std::string(to_string(c)) +
                                " headlines, expected 8");
      }
    }
    if (positive != kHeadlinesPerTreatment / 2)
      throw ValidationError(where + " has " + std::to_string(positive) +
                            " positive headlines, expected 24");
  }
  for (const auto& [pair, hs] : by_pair) {
    if (hs.size() != 2)
      throw ValidationError(source + ": pair " + pair.value + " has " +
                            std::to_string(hs.size()) + " headlines, expected 2");
    if (hs[0]->genuine == hs[1]->genuine)
      throw ValidationError(source + ": pair " + pair.value +
                            " must contain one genuine and one altered headline");
    if (hs[0]->treatment == hs[1]->treatment)
      throw ValidationError(source + ": both headlines of pair " + pair.value +
                            " are in treatment " + std::to_string(hs[0]->treatment));
  }
}

// -- Dataset ------------------------------------------------------------------

// Immutable after construction; safe to share read-only between threads.
class Dataset {
 public:
  Dataset(std::vector<Headline> headlines, std::vector<Participant> participants,
          std::vector<ResponseRecord> responses, Provenance provenance = {})
      : headlines_(std::move(headlines)),
        participants_(std::move(participants)),
        responses_(std::move(responses)),
        provenance_(std::move(provenance)) {
    validate_headlines(headlines_);
    index();
    derive_majority();
  }

  const std::vector<Headline>& headlines() const { return headlines_; }
  const std::vector<Participant>& participants() const { return participants_; }
  const std::vector<ResponseRecord>& responses() const { return responses_; }
  const Provenance& provenance() const { return provenance_; }
  const std::optional<std::string>& modal_ethnicity() const { return modal_ethnicity_; }

  std::optional<std::size_t> headline_index(const HeadlineId& id) const {
    auto it = headline_by_id_.find(id.value);
    if (it == headline_by_id_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> participant_index(const ParticipantId& id) const {
    auto it = participant_by_id_.find(id.value);
    if (it == participant_by_id_.end()) return std::nullopt;
    return it->second;
  }

  const ResponseRecord* response(std::size_t participant, std::size_t headline) const {
    auto it = response_by_key_.find(key(participant, headline));
    return it == response_by_key_.end() ? nullptr : &responses_[it->second];
  }

  // Mapped probability p_n(h).
  double probability(const ResponseRecord& r) const { return map_response(r.raw_level); }

  // Treatments that have at least one participant, ascending.
  std::vector<int> treatments() const {
    std::set<int> t;
    for (const Participant& p : participants_) t.insert(p.treatment);
    return {t.begin(), t.end()};
  }

  std::vector<std::size_t> headlines_in(int treatment) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < headlines_.size(); ++i)
      if (headlines_[i].treatment == treatment) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> participants_in(int treatment) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < participants_.size(); ++i)
      if (participants_[i].treatment == treatment) out.push_back(i);
    return out;
  }

  // Index of the other headline of the same pair.
  std::size_t counterpart(std::size_t headline) const { return counterpart_[headline]; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.headlines_ == b.headlines_ && a.participants_ == b.participants_ &&
           a.responses_ == b.responses_;
  }

 private:
  static std::uint64_t key(std::size_t p, std::size_t h) {
    return (static_cast<std::uint64_t>(p) << 32) | static_cast<std::uint64_t>(h);
  }

  void index() {
    for (std::size_t i = 0; i < headlines_.size(); ++i)
      headline_by_id_.emplace(headlines_[i].id.value, i);
    std::map<PairId, std::vector<std::size_t>> pairs;
    for (std::size_t i = 0; i < headlines_.size(); ++i) pairs[headlines_[i].pair_id].push_back(i);
    counterpart_.resize(headlines_.size());
    for (const auto& [pair, idx] : pairs) {
      counterpart_[idx[0]] = idx[1];
      counterpart_[idx[1]] = idx[0];
    }

    for (std::size_t i = 0; i < participants_.size(); ++i) {
      const Participant& p = participants_[i];
      if (!participant_by_id_.emplace(p.id.value, i).second)
        throw ValidationError("duplicate participant id " + p.id.value);
      if (p.treatment < 1 || p.treatment > kNumTreatments)
        throw ValidationError("participant " + p.id.value + " has treatment outside 1..5");
      if (p.age && *p.age < 18)
        throw ValidationError("participant " + p.id.value + " is younger than 18");
    }

    std::vector<int> counts(participants_.size(), 0);
    for (std::size_t r = 0; r < responses_.size(); ++r) {
      const ResponseRecord& rec = responses_[r];
      if (rec.participant >= participants_.size() || rec.headline >= headlines_.size())
        throw ValidationError("response " + std::to_string(r) + " references unknown record");
      const Participant& p = participants_[rec.participant];
      const Headline& h = headlines_[rec.headline];
      if (h.treatment != p.treatment)
        throw ValidationError("participant " + p.id.value + " (treatment " +
                              std::to_string(p.treatment) + ") answered headline " + h.id.value +
                              " of treatment " + std::to_string(h.treatment));
      if (rec.raw_level < 1 || rec.raw_level > 5)
        throw ValidationError("response level out of range for participant " + p.id.value);
      if (rec.response_time_ms < 0)
        throw ValidationError("negative response time for participant " + p.id.value);
      if (!response_by_key_.emplace(key(rec.participant, rec.headline), r).second)
        throw ValidationError("duplicate response for participant " + p.id.value +
                              " and headline " + h.id.value);
      ++counts[rec.participant];
    }
    for (std::size_t i = 0; i < participants_.size(); ++i) {
      if (counts[i] != kHeadlinesPerTreatment)
        throw ValidationError("participant " + participants_[i].id.value + " has " +
                              std::to_string(counts[i]) + " responses, expected 48");
    }
  }

  void derive_majority() {
    std::map<std::string, int> freq;
    for (const Participant& p : participants_)
      if (p.ethnicity) ++freq[*p.ethnicity];
    int best = 0;
    for (const auto& [name, n] : freq) {
      if (n > best) {  // strict: ties keep the lexicographically smaller name
        best = n;
        modal_ethnicity_ = name;
      }
    }
    for (Participant& p : participants_)
      p.ethnic_majority = p.ethnicity && modal_ethnicity_ && *p.ethnicity == *modal_ethnicity_;
  }

  std::vector<Headline> headlines_;
  std::vector<Participant> participants_;
  std::vector<ResponseRecord> responses_;
  Provenance provenance_;
  std::optional<std::string> modal_ethnicity_;
  std::unordered_map<std::string, std::size_t> headline_by_id_;
  std::unordered_map<std::string, std::size_t> participant_by_id_;
  std::unordered_map<std::uint64_t, std::size_t> response_by_key_;
  std::vector<std::size_t> counterpart_;
};

// -- CSV ingestion ------------------------------------------------------------

// Column renames applied before validation, for archives whose headers differ
// from headlines.csv / responses.csv as documented in the README.
struct SchemaAliases {
  std::unordered_map<std::string, std::string> headline_columns;
  std::unordered_map<std::string, std::string> response_columns;
};

namespace detail {

inline int parse_int_field(const csv::Table& t, const csv::Record& r, std::size_t col,
                           std::string_view name) {
  auto v = csv::to_number<long long>(r.fields[col]);
  if (!v)
    throw ValidationError(t.source(), r.line,
                          "column '" + std::string(name) + "': expected integer, got '" +
                              r.fields[col] + "'");
  return static_cast<int>(*v);
}

inline bool parse_bool_field(const csv::Table& t, const csv::Record& r, std::size_t col) {
  const std::string v = lower(csv::trim(r.fields[col]));
  if (v == "1" || v == "true" || v == "genuine") return true;
  if (v == "0" || v == "false" || v == "altered") return false;
  throw ValidationError(t.source(), r.line, "column 'genuine': expected 0 or 1, got '" +
                                                r.fields[col] + "'");
}

}  // namespace detail

inline std::vector<Headline> parse_headlines(const csv::Table& t) {
  const std::size_t c_id = t.column("headline_id");
  const std::size_t c_treat = t.column("treatment");
  const std::size_t c_pair = t.column("pair_id");
  const std::size_t c_text = t.column("text");
  const std::size_t c_cat = t.column("category");
  const std::size_t c_sent = t.column("sentiment");
  const std::size_t c_gen = t.column("genuine");

  std::vector<Headline> out;
  out.reserve(t.size());
  std::set<std::string> ids;
  for (const csv::Record& r : t.rows()) {
    Headline h;
    h.id.value = std::string(csv::trim(r.fields[c_id]));
    if (h.id.value.empty()) throw ValidationError(t.source(), r.line, "empty headline_id");
    if (!ids.insert(h.id.value).second)
      throw ValidationError(t.source(), r.line, "duplicate headline_id '" + h.id.value + "'");
    h.treatment = detail::parse_int_field(t, r, c_treat, "treatment");
    h.pair_id.value = std::string(csv::trim(r.fields[c_pair]));
    h.text = r.fields[c_text];
    auto cat = parse_category(csv::trim(r.fields[c_cat]));
    if (!cat)
      throw ValidationError(t.source(), r.line, "unknown category '" + r.fields[c_cat] + "'");
    h.category = *cat;
    auto sent = parse_sentiment(csv::trim(r.fields[c_sent]));
    if (!sent)
      throw ValidationError(t.source(), r.line, "unknown sentiment '" + r.fields[c_sent] + "'");
    h.sentiment = *sent;
    h.genuine = detail::parse_bool_field(t, r, c_gen);
    out.push_back(std::move(h));
  }
  return out;
}

inline Dataset load_dataset(const std::string& headline_path, const std::string& response_path,
                            const SchemaAliases& aliases = {}) {
  const std::string headline_text = csv::read_file(headline_path);
  const std::string response_text = csv::read_file(response_path);

  csv::Table ht(csv::parse(headline_text, headline_path), headline_path);
  ht.apply_aliases(aliases.headline_columns);
  std::vector<Headline> headlines = parse_headlines(ht);
  validate_headlines(headlines, headline_path);
  std::unordered_map<std::string, std::size_t> headline_by_id;
  for (std::size_t i = 0; i < headlines.size(); ++i) headline_by_id.emplace(headlines[i].id.value, i);

  csv::Table rt(csv::parse(response_text, response_path), response_path);
  rt.apply_aliases(aliases.response_columns);
  const std::size_t c_pid = rt.column("participant_id");
  const std::size_t c_treat = rt.column("treatment");
  const std::size_t c_hid = rt.column("headline_id");
  const std::size_t c_pos = rt.column("position");
  const std::size_t c_level = rt.column("raw_level");
  const std::size_t c_time = rt.column("response_time_ms");
  const std::size_t c_age = rt.column("age");
  const std::size_t c_gender = rt.column("gender");
  const std::size_t c_eth = rt.column("ethnicity");

  std::vector<Participant> participants;
  std::unordered_map<std::string, std::size_t> participant_by_id;
  std::vector<ResponseRecord> responses;
  responses.reserve(rt.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;

  for (const csv::Record& r : rt.rows()) {
    Participant p;
    p.id.value = std::string(csv::trim(r.fields[c_pid]));
    if (p.id.value.empty()) throw ValidationError(response_path, r.line, "empty participant_id");
    p.treatment = detail::parse_int_field(rt, r, c_treat, "treatment");
    if (p.treatment < 1 || p.treatment > kNumTreatments)
      throw ValidationError(response_path, r.line, "treatment outside 1..5");
    if (!is_na_token(r.fields[c_age])) {
      auto age = csv::to_number<double>(r.fields[c_age]);
      if (!age) throw ValidationError(response_path, r.line, "invalid age '" + r.fields[c_age] + "'");
      if (*age < 18) throw ValidationError(response_path, r.line, "age below 18");
      p.age = static_cast<int>(*age);
    }
    p.gender = parse_gender(r.fields[c_gender]);
    if (!is_na_token(r.fields[c_eth])) p.ethnicity = std::string(csv::trim(r.fields[c_eth]));

    auto [it, inserted] = participant_by_id.emplace(p.id.value, participants.size());
    if (inserted) {
      participants.push_back(p);
    } else {
      const Participant& q = participants[it->second];
      if (q.treatment != p.treatment || q.age != p.age || q.gender != p.gender ||
          q.ethnicity != p.ethnicity)
        throw ValidationError(response_path, r.line,
                              "demographics or treatment of participant '" + p.id.value +
                                  "' differ from an earlier row");
    }
    const std::size_t pidx = it->second;

    const std::string hid(csv::trim(r.fields[c_hid]));
    auto hit = headline_by_id.find(hid);
    if (hit == headline_by_id.end())
      throw ValidationError(response_path, r.line, "unknown headline_id '" + hid + "'");
    const std::size_t hidx = hit->second;
    if (headlines[hidx].treatment != p.treatment)
      throw ValidationError(response_path, r.line,
                            "headline '" + hid + "' belongs to treatment " +
                                std::to_string(headlines[hidx].treatment) + ", not " +
                                std::to_string(p.treatment));
    if (!seen.emplace(pidx, hidx).second)
      throw ValidationError(response_path, r.line,
                            "duplicate response for participant '" + p.id.value +
                                "' and headline '" + hid + "'");

    ResponseRecord rec;
    rec.participant = pidx;
    rec.headline = hidx;
    rec.raw_level = detail::parse_int_field(rt, r, c_level, "raw_level");
    if (rec.raw_level < 1 || rec.raw_level > 5)
      throw ValidationError(response_path, r.line, "raw_level outside 1..5");
    rec.position = detail::parse_int_field(rt, r, c_pos, "position");
    auto ms = csv::to_number<double>(r.fields[c_time]);
    if (!ms || *ms < 0)
      throw ValidationError(response_path, r.line,
                            "response_time_ms must be a nonnegative number");
    rec.response_time_ms = static_cast<std::int64_t>(std::llround(*ms));
    responses.push_back(rec);
  }

  Provenance prov{headline_path, response_path, hex64(hash_string(headline_text)),
                  hex64(hash_string(response_text))};
  return Dataset(std::move(headlines), std::move(participants), std::move(responses),
                 std::move(prov));
}

inline void write_headlines(const Dataset& d, std::ostream& out) {
  csv::Writer w(out);
  w.row("headline_id", "treatment", "pair_id", "text", "category", "sentiment", "genuine");
  for (const Headline& h : d.headlines())
    w.row(h.id.value, h.treatment, h.pair_id.value, h.text, to_string(h.category),
          to_string(h.sentiment), h.genuine ? 1 : 0);
}

inline void write_responses(const Dataset& d, std::ostream& out) {
  csv::Writer w(out);
  w.row("participant_id", "treatment", "headline_id", "position", "raw_level",
        "response_time_ms", "age", "gender", "ethnicity");
  for (const ResponseRecord& r : d.responses()) {
    const Participant& p = d.participants()[r.participant];
    const std::string gender = p.gender == Gender::kNA ? "" : std::string(to_string(p.gender));
    w.row(p.id.value, p.treatment, d.headlines()[r.headline].id.value, r.position, r.raw_level,
          static_cast<long long>(r.response_time_ms), p.age ? std::to_string(*p.age) : "",
          gender, p.ethnicity.value_or(""));
  }
}

inline void write_dataset(const Dataset& d, const std::string& headline_path,
                          const std::string& response_path) {
  std::ofstream h(headline_path, std::ios::binary);
  std::ofstream r(response_path, std::ios::binary);
  if (!h || !r) throw ValidationError("cannot write dataset to " + headline_path);
  write_headlines(d, h);
  write_responses(d, r);
}

// -- TreatmentView ------------------------------------------------------------

// Dense per-treatment slice used by the simulator: probabilities[member][headline].
class TreatmentView {
 public:
  TreatmentView(const Dataset& d, int treatment)
      : treatment_(treatment),
        headlines_(d.headlines_in(treatment)),
        participants_(d.participants_in(treatment)) {
    probabilities_.assign(participants_.size() * headlines_.size(),
                          std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < participants_.size(); ++i) {
      for (std::size_t j = 0; j < headlines_.size(); ++j) {
        if (const ResponseRecord* r = d.response(participants_[i], headlines_[j]))
          probabilities_[i * headlines_.size() + j] = map_response(r->raw_level);
      }
    }
    for (std::size_t j : headlines_) {
      truth_.push_back(d.headlines()[j].truth());
      category_.push_back(d.headlines()[j].category);
    }
  }

  int treatment() const { return treatment_; }
  std::size_t num_headlines() const { return headlines_.size(); }
  std::size_t num_participants() const { return participants_.size(); }
  // Global dataset indices.
  const std::vector<std::size_t>& headlines() const { return headlines_; }
  const std::vector<std::size_t>& participants() const { return participants_; }
  int truth(std::size_t local_headline) const { return truth_[local_headline]; }
  Category category(std::size_t local_headline) const { return category_[local_headline]; }

  // NaN when the response is missing.
  double probability(std::size_t local_participant, std::size_t local_headline) const {
    return probabilities_[local_participant * headlines_.size() + local_headline];
  }

 private:
  int treatment_;
  std::vector<std::size_t> headlines_;
  std::vector<std::size_t> participants_;
  std::vector<int> truth_;
  std::vector<Category> category_;
  std::vector<double> probabilities_;
};

}  // namespace cdm
