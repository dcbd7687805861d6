#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cdm/stats/correlation.hpp"
#include "cdm/synth/generator.hpp"

namespace cdm::synth {

struct CalibrationTargets {
  std::array<double, 3> accuracy = {0.55, 0.55, 0.55};  // mean 1 - eps per category
  std::optional<double> correlation;                    // mean pairwise Pearson; unset = keep rho
  double tolerance = 0.0025;
  std::size_t samples = 10000;  // Monte-Carlo draws per probe
  int max_probes = 50;
};

struct CalibrationReport {
  SynthConfig config;
  std::array<double, 3> scale{};     // multiplier applied to each category's profile deltas
  std::array<double, 3> accuracy{};  // achieved (Monte-Carlo)
  double correlation = 0.0;          // achieved (Monte-Carlo), if calibrated
  int probes = 0;
};

namespace detail {

// Common random numbers for the accuracy probes of one category.
struct AccuracyDraws {
  std::vector<double> shape;  // profile delta for the category
  std::vector<int> truth;
  std::vector<double> bias;
  std::vector<double> noise;
};

inline AccuracyDraws accuracy_draws(const SynthConfig& cfg, std::size_t c, std::size_t samples) {
  AccuracyDraws d;
  Rng rng(mix_seed({cfg.seed, hash_string("calibrate-accuracy"), c}));
  double total = 0.0;
  for (const auto& p : cfg.profiles) total += p.share;
  for (std::size_t i = 0; i < samples; ++i) {
    // stratified profile membership
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(samples) * total;
    double acc = 0.0;
    std::size_t k = 0;
    while (k + 1 < cfg.profiles.size() && u > acc + cfg.profiles[k].share) acc += cfg.profiles[k++].share;
    d.shape.push_back(cfg.profiles[k].delta[c]);
    d.truth.push_back(static_cast<int>(i % 2));
    d.bias.push_back(cfg.bias[c][(i / 2) % 2]);
    d.noise.push_back(rng.normal());
  }
  return d;
}

inline double probe_accuracy(const AccuracyDraws& d, double scale, const std::array<double, 4>& th) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.noise.size(); ++i) {
    const double sign = d.truth[i] ? 1.0 : -1.0;
    const int level = quantize(sign * scale * d.shape[i] + d.bias[i] + d.noise[i], th);
    s += response_accuracy(map_response(level), d.truth[i]);
  }
  return s / static_cast<double>(d.noise.size());
}

// Mean pairwise correlation of virtual treatments, with fixed draws so that
// the estimate moves smoothly with rho.
struct CorrelationDraws {
  std::vector<Headline> items;
  std::vector<std::vector<double>> shared;               // [replicate][item]
  std::vector<std::vector<std::vector<double>>> own;     // [replicate][expert][item]
  std::vector<std::vector<std::size_t>> profile;         // [replicate][expert]
};

inline CorrelationDraws correlation_draws(const SynthConfig& cfg, std::size_t samples) {
  CorrelationDraws d;
  for (const auto& h : make_headlines())
    if (h.treatment == 1) d.items.push_back(h);
  const std::size_t p = cfg.experts_per_treatment;
  const std::size_t pairs = std::max<std::size_t>(1, p * (p - 1) / 2);
  const std::size_t reps = std::max<std::size_t>(1, (samples + pairs - 1) / pairs);
  Rng rng(mix_seed({cfg.seed, hash_string("calibrate-correlation")}));
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> u(d.items.size());
    for (double& x : u) x = rng.normal();
    std::vector<std::vector<double>> v(p, std::vector<double>(d.items.size()));
    for (auto& row : v)
      for (double& x : row) x = rng.normal();
    d.shared.push_back(std::move(u));
    d.own.push_back(std::move(v));
    d.profile.push_back(assign_profiles(cfg.profiles, p, rng));
  }
  return d;
}

inline double probe_correlation(const CorrelationDraws& d, const SynthConfig& cfg, double rho) {
  const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  stats::PairwiseCorrelation acc;
  for (std::size_t r = 0; r < d.shared.size(); ++r) {
    std::vector<std::vector<double>> vecs;
    for (std::size_t n = 0; n < d.own[r].size(); ++n) {
      const auto& delta = cfg.profiles[d.profile[r][n]].delta;
      std::vector<double> x;
      for (std::size_t j = 0; j < d.items.size(); ++j) {
        const Headline& h = d.items[j];
        const auto c = static_cast<std::size_t>(h.category);
        const double z = (h.genuine ? 1.0 : -1.0) * delta[c] +
                         cfg.bias[c][static_cast<std::size_t>(h.sentiment)] + a * d.shared[r][j] +
                         b * d.own[r][n][j];
        x.push_back(map_response(quantize(z, cfg.thresholds)));
      }
      vecs.push_back(std::move(x));
    }
    acc.merge(stats::within_correlation(vecs));
  }
  return acc.mean();
}

}  // namespace detail

// Monte-Carlo estimate of mean accuracy per category (independent of rho).
inline std::array<double, 3> estimate_accuracy(const SynthConfig& cfg, std::size_t samples = 10000) {
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c)
    out[c] = detail::probe_accuracy(detail::accuracy_draws(cfg, c, samples), 1.0, cfg.thresholds);
  return out;
}

inline double estimate_correlation(const SynthConfig& cfg, std::size_t samples = 10000) {
  return detail::probe_correlation(detail::correlation_draws(cfg, samples), cfg, cfg.rho);
}

// Rescales each category's profile deltas, then rho, by bisection against
// Monte-Carlo estimates until every target is met within the tolerance.
inline CalibrationReport calibrate(const SynthConfig& base, const CalibrationTargets& target) {
  base.validate();
  CalibrationReport rep;
  rep.config = base;
  const double tol = target.tolerance;

  for (std::size_t c = 0; c < 3; ++c) {
    const double goal = target.accuracy[c];
    if (!(goal >= 0.5 && goal < 1.0))
      throw ValidationError("calibrate: accuracy target must be in [0.5, 1)");
    const auto draws = detail::accuracy_draws(base, c, target.samples);
    auto at = [&](double s) {
      ++rep.probes;
      return detail::probe_accuracy(draws, s, base.thresholds);
    };
    double lo = 0.0, hi = 1.0, s = 0.0;
    double got = at(lo);
    int probes = 1;
    if (std::fabs(got - goal) >= tol) {
      if (got > goal)
        throw ValidationError("calibrate: " + std::string(to_string(Category(c))) +
                              " accuracy is already " + std::to_string(got) + " at zero competence");
      while (at(hi) < goal) {
        lo = hi;
        hi *= 2.0;
        if (++probes >= target.max_probes)
          throw ValidationError("calibrate: accuracy target " + std::to_string(goal) +
                                " unreachable for " + std::string(to_string(Category(c))));
      }
      for (;;) {
        s = 0.5 * (lo + hi);
        got = at(s);
        if (std::fabs(got - goal) < tol) break;
        (got < goal ? lo : hi) = s;
        if (++probes >= target.max_probes)
          throw ValidationError("calibrate: accuracy target " + std::to_string(goal) +
                                " not met within " + std::to_string(target.max_probes) + " probes");
      }
    }
    rep.scale[c] = s;
    rep.accuracy[c] = got;
    for (auto& p : rep.config.profiles) p.delta[c] *= s;
  }

  if (target.correlation) {
    const double goal = *target.correlation;
    if (!(goal >= 0.0 && goal <= 0.95)) throw ValidationError("calibrate: correlation target must be in [0, 0.95]");
    const auto draws = detail::correlation_draws(rep.config, target.samples);
    auto at = [&](double rho) {
      ++rep.probes;
      return detail::probe_correlation(draws, rep.config, rho);
    };
    double lo = 0.0, hi = 0.95, rho = 0.0;
    double got = at(lo);
    int probes = 1;
    if (std::fabs(got - goal) >= tol) {
      if (got > goal)
        throw ValidationError("calibrate: correlation is already " + std::to_string(got) +
                              " at rho = 0; target " + std::to_string(goal) + " unreachable");
      if (at(hi) < goal) throw ValidationError("calibrate: correlation target unreachable");
      for (;;) {
        rho = 0.5 * (lo + hi);
        got = at(rho);
        if (std::fabs(got - goal) < tol) break;
        (got < goal ? lo : hi) = rho;
        if (++probes >= target.max_probes)
          throw ValidationError("calibrate: correlation target not met within " +
                                std::to_string(target.max_probes) + " probes");
      }
    }
    rep.config.rho = rho;
    rep.correlation = got;
  }
  return rep;
}

}  // namespace cdm::synth
