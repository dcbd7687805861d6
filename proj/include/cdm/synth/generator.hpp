#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cdm/core.hpp"
#include "cdm/dataset.hpp"
#include "cdm/error.hpp"
#include "cdm/rng.hpp"

namespace cdm::synth {

// A kind of expert: `share` of each treatment's participants get competence
// `delta` per category (gender, ethnicity, age).
struct ExpertProfile {
  std::string name;
  double share = 1.0;
  std::array<double, 3> delta{};
};

struct DemographicMarginals {
  double female = 0.49;
  double other_gender = 0.01;
  double gender_na = 0.005;
  double age_median = 35.0;  // age - 18 is lognormal around median - 18
  double age_sigma = 0.45;
  double age_na = 0.0;
  std::vector<std::pair<std::string, double>> ethnicity = {
      {"White", 0.66}, {"Black", 0.12}, {"Asian", 0.1}, {"Mixed", 0.07}, {"Other", 0.04},
      {"", 0.01}};  // "" = NA
};

struct SynthConfig {
  std::size_t experts_per_treatment = 40;
  std::vector<ExpertProfile> profiles = {{"base", 1.0, {0.15, 0.15, 0.15}}};
  double rho = 0.0;                              // latent correlation shared across experts
  std::array<std::array<double, 2>, 3> bias{};   // [category][sentiment] additive latent shift
  std::array<double, 4> thresholds = {-0.8, -0.25, 0.25, 0.8};
  std::array<std::array<double, 3>, 2> gender_delta{};  // [male, female][category], added to delta
  std::array<double, 3> minority_delta{};               // added to delta of ethnic minorities
  DemographicMarginals demographics;
  double response_time_median_ms = 6000.0;
  double response_time_sigma = 0.6;
  std::uint64_t seed = 1;

  void validate() const {
    if (experts_per_treatment < 1) throw ValidationError("synth: need at least one expert per treatment");
    if (profiles.empty()) throw ValidationError("synth: no expert profiles");
    double total = 0.0;
    for (const auto& p : profiles) {
      if (!(p.share >= 0.0)) throw ValidationError("synth: profile share must be >= 0");
      for (double d : p.delta)
        if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("synth: competence must be finite and >= 0");
      total += p.share;
    }
    if (!(total > 0.0)) throw ValidationError("synth: profile shares sum to zero");
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("synth: rho must be in [0, 1)");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (!(thresholds[i] > thresholds[i - 1]))
        throw ValidationError("synth: thresholds must be strictly increasing");
    for (const auto& row : bias)
      for (double b : row)
        if (!std::isfinite(b)) throw ValidationError("synth: bias must be finite");
    if (!(response_time_median_ms > 0.0) || !(response_time_sigma >= 0.0))
      throw ValidationError("synth: bad response time parameters");
    if (demographics.ethnicity.empty()) throw ValidationError("synth: empty ethnicity marginals");
  }
};

// 1..5 from the latent score.
inline int quantize(double z, const std::array<double, 4>& thresholds) {
  int level = 1;
  for (double t : thresholds) level += z > t;
  return level;
}

// Questionnaire layout: 40 pairs per category. Pair i shows its genuine
// version in treatment i/8 + 1 and its altered version in the next
// treatment (cyclically); sentiment alternates with i.
inline std::vector<Headline> make_headlines() {
  std::vector<Headline> out;
  int serial = 0;
  for (Category c : kCategories) {
    for (int i = 0; i < 40; ++i) {
      const std::string pair = "p" + std::string(to_string(c)).substr(0, 3) + std::to_string(i);
      const Sentiment s = i % 2 == 0 ? Sentiment::kPositive : Sentiment::kNegative;
      for (bool genuine : {true, false}) {
        Headline h;
        h.id.value = "h" + std::to_string(++serial);
        h.treatment = genuine ? i / 8 + 1 : (i / 8 + 1) % kNumTreatments + 1;
        h.category = c;
        h.sentiment = s;
        h.genuine = genuine;
        h.pair_id.value = pair;
        h.text = "synthetic " + std::string(to_string(c)) + " item " + std::to_string(i) + " (" +
                 std::string(to_string(s)) + ", " + (genuine ? "genuine" : "altered") + ")";
        out.push_back(std::move(h));
      }
    }
  }
  return out;
}

// Profile of each of `count` experts: largest-remainder allocation of the
// shares, then shuffled.
inline std::vector<std::size_t> assign_profiles(const std::vector<ExpertProfile>& profiles,
                                                std::size_t count, Rng& rng) {
  double total = 0.0;
  for (const auto& p : profiles) total += p.share;
  std::vector<std::size_t> n(profiles.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double exact = profiles[i].share / total * static_cast<double>(count);
    n[i] = static_cast<std::size_t>(std::floor(exact));
    used += n[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; used < count; ++k, ++used) ++n[rem[k % rem.size()].second];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.insert(out.end(), n[i], i);
  rng.shuffle(out.begin(), out.end());
  return out;
}

struct SyntheticPopulation {
  Dataset dataset;
  std::vector<std::size_t> profile;               // per participant
  std::vector<std::array<double, 3>> competence;  // effective delta per participant
};

inline std::uint64_t headline_stream(std::uint64_t seed, std::size_t h) {
  return mix_seed({seed, hash_string("headline"), h});
}
inline std::uint64_t participant_stream(std::uint64_t seed, std::size_t p) {
  return mix_seed({seed, hash_string("participant"), p});
}

namespace detail {

inline Participant draw_demographics(const DemographicMarginals& m, Rng& rng) {
  Participant p;
  const double g = rng.uniform();
  if (g < m.gender_na) p.gender = Gender::kNA;
  else if (g < m.gender_na + m.other_gender) p.gender = Gender::kOther;
  else if (g < m.gender_na + m.other_gender + m.female) p.gender = Gender::kFemale;
  else p.gender = Gender::kMale;
  const double age_draw = rng.normal();
  if (rng.uniform() >= m.age_na) {
    const double over = std::max(0.0, m.age_median - 18.0);
    p.age = 18 + static_cast<int>(std::floor(over * std::exp(m.age_sigma * age_draw) + 0.5));
  }
  std::vector<double> w;
  for (const auto& e : m.ethnicity) w.push_back(e.second);
  const auto& pick = m.ethnicity[rng.categorical(w)].first;
  if (!pick.empty()) p.ethnicity = pick;
  return p;
}

inline std::string modal_marginal(const DemographicMarginals& m) {
  auto it = std::max_element(m.ethnicity.begin(), m.ethnicity.end(),
                              [](const auto& a, const auto& b) { return a.second < b.second; });
  return it->first;
}

}  // namespace detail

// Gaussian latent-score population:
//   z = s(y) delta_{n,c} + bias_{c,s} + sqrt(rho) u_h + sqrt(1 - rho) v_{n,h}
// quantized through the thresholds. u_h is shared by everyone rating h.
inline SyntheticPopulation generate(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<Headline> headlines = make_headlines();
  std::vector<double> shared(headlines.size());
  for (std::size_t h = 0; h < headlines.size(); ++h) {
    Rng r(headline_stream(cfg.seed, h));
    shared[h] = r.normal();
  }

  std::vector<Participant> participants;
  std::vector<ResponseRecord> responses;
  std::vector<std::size_t> profile;
  std::vector<std::array<double, 3>> competence;
  const double a = std::sqrt(cfg.rho), b = std::sqrt(1.0 - cfg.rho);
  const std::string modal = detail::modal_marginal(cfg.demographics);
  const double time_mu = std::log(cfg.response_time_median_ms);

  for (int t = 1; t <= kNumTreatments; ++t) {
    std::vector<std::size_t> items;
    for (std::size_t h = 0; h < headlines.size(); ++h)
      if (headlines[h].treatment == t) items.push_back(h);
    Rng prof_rng(mix_seed({cfg.seed, hash_string("profiles"), static_cast<std::uint64_t>(t)}));
    const auto assigned = assign_profiles(cfg.profiles, cfg.experts_per_treatment, prof_rng);

    for (std::size_t j = 0; j < cfg.experts_per_treatment; ++j) {
      const std::size_t pi = participants.size();
      Rng rng(participant_stream(cfg.seed, pi));
      Participant p = detail::draw_demographics(cfg.demographics, rng);
      p.id.value = "s" + std::to_string(pi + 1);
      p.treatment = t;

      std::array<double, 3> delta = cfg.profiles[assigned[j]].delta;
      for (int c = 0; c < 3; ++c) {
        if (p.gender == Gender::kMale) delta[c] += cfg.gender_delta[0][c];
        if (p.gender == Gender::kFemale) delta[c] += cfg.gender_delta[1][c];
        if (p.ethnicity && *p.ethnicity != modal) delta[c] += cfg.minority_delta[c];
        delta[c] = std::max(0.0, delta[c]);
      }

      std::vector<int> order(items.size());
      std::iota(order.begin(), order.end(), 1);
      rng.shuffle(order.begin(), order.end());
      for (std::size_t k = 0; k < items.size(); ++k) {
        const Headline& h = headlines[items[k]];
        const auto c = static_cast<std::size_t>(h.category);
        const double sign = h.genuine ? 1.0 : -1.0;
        const double z = sign * delta[c] + cfg.bias[c][static_cast<std::size_t>(h.sentiment)] +
                         a * shared[items[k]] + b * rng.normal();
        ResponseRecord r;
        r.participant = pi;
        r.headline = items[k];
        r.raw_level = quantize(z, cfg.thresholds);
        r.position = order[k];
        r.response_time_ms = static_cast<std::int64_t>(
            std::llround(std::exp(time_mu + cfg.response_time_sigma * rng.normal())));
        responses.push_back(r);
      }
      participants.push_back(std::move(p));
      profile.push_back(assigned[j]);
      competence.push_back(delta);
    }
  }
  Provenance prov;
  prov.headline_source = prov.response_source = "synthetic:seed=" + std::to_string(cfg.seed);
  return SyntheticPopulation{
      Dataset(std::move(headlines), std::move(participants), std::move(responses), std::move(prov)),
      std::move(profile), std::move(competence)};
}

}  // namespace cdm::synth
