#pragma once

#include <string>

#include "cdm/synth/calibrate.hpp"

namespace cdm::synth {

// Everyone equally (weakly) competent.
inline SynthConfig homogeneous_preset(std::uint64_t seed = 1) {
  SynthConfig c;
  c.seed = seed;
  c.profiles = {{"uniform", 1.0, {0.15, 0.15, 0.15}}};
  c.rho = 0.15;
  return c;
}

// A minority of strong experts among near-chance raters. Shapes only;
// calibrate() scales them to a target accuracy.
inline SynthConfig heterogeneous_preset(std::uint64_t seed = 1) {
  SynthConfig c;
  c.seed = seed;
  c.profiles = {{"strong", 0.15, {1.0, 1.0, 1.0}}, {"weak", 0.85, {0.1, 0.1, 0.1}}};
  c.rho = 0.15;
  return c;
}

// One subset is only good on ethnicity headlines, the rest only on gender
// and age headlines.
inline SynthConfig ethnicity_specialist_preset(std::uint64_t seed = 1) {
  SynthConfig c;
  c.seed = seed;
  c.profiles = {{"ethnicity", 0.3, {0.0, 1.2, 0.0}}, {"general", 0.7, {0.5, 0.0, 0.5}}};
  c.rho = 0.1;
  return c;
}

inline SynthConfig preset(const std::string& name, std::uint64_t seed = 1) {
  if (name == "homogeneous") return homogeneous_preset(seed);
  if (name == "heterogeneous") return heterogeneous_preset(seed);
  if (name == "ethnicity_specialists") return ethnicity_specialist_preset(seed);
  throw ValidationError("unknown synth preset '" + name + "'");
}

// Heterogeneous population scaled to mean accuracy 0.55 and mean pairwise
// correlation 0.18, the regime of the human data.
inline CalibrationReport calibrated_heterogeneous(std::uint64_t seed = 1) {
  CalibrationTargets t;
  t.accuracy = {0.55, 0.55, 0.55};
  t.correlation = 0.18;
  return calibrate(heterogeneous_preset(seed), t);
}

// The small dataset bundled with the CLI (`--fixture`): the calibrated
// heterogeneous population, 40 synthetic raters per treatment.
inline SyntheticPopulation bundled_fixture() {
  return generate(calibrated_heterogeneous(1).config);
}

}  // namespace cdm::synth
