#pragma once

// Hand-built datasets for tests. Responses come from a callback so each test
// can script exactly what every participant says.

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "cdm/cdm.hpp"

namespace fixtures {

using LevelFn = std::function<int(std::size_t participant, const cdm::Headline&)>;
using PersonFn = std::function<void(std::size_t participant, cdm::Participant&)>;

// `per_treatment` participants in each of `treatments` treatments; global
// participant index is passed to the callbacks.
inline cdm::Dataset scripted(std::size_t per_treatment, const LevelFn& level, const PersonFn& person = {},
                             int treatments = cdm::kNumTreatments) {
  auto headlines = cdm::synth::make_headlines();
  std::vector<cdm::Participant> people;
  std::vector<cdm::ResponseRecord> responses;
  for (int t = 1; t <= treatments; ++t) {
    for (std::size_t k = 0; k < per_treatment; ++k) {
      const std::size_t idx = people.size();
      cdm::Participant p;
      p.id.value = "p" + std::to_string(idx);
      p.treatment = t;
      p.age = 30;
      p.gender = cdm::Gender::kMale;
      p.ethnicity = "A";
      if (person) person(idx, p);
      people.push_back(p);
      int pos = 0;
      for (std::size_t h = 0; h < headlines.size(); ++h) {
        if (headlines[h].treatment != t) continue;
        cdm::ResponseRecord r;
        r.participant = idx;
        r.headline = h;
        r.raw_level = level(idx, headlines[h]);
        r.position = pos++;
        r.response_time_ms = 1000 + static_cast<std::int64_t>(idx * 48 + h);
        responses.push_back(r);
      }
    }
  }
  return cdm::Dataset(std::move(headlines), std::move(people), std::move(responses));
}

// Everyone answers every headline correctly and with full confidence.
inline int perfect(std::size_t, const cdm::Headline& h) { return h.genuine ? 5 : 1; }

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("cdm_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixtures
