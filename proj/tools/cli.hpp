#pragma once

// Command-line front end: option parsing, run-config merging and the
// subcommands. Kept in a header so tests can drive it in-process.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdm/cdm.hpp"

namespace cdm::cli {

using json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// -- Run config ---------------------------------------------------------------

inline std::string default_output_dir() {
  if (const char* env = std::getenv("CDM_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

inline json default_config() {
  json algorithms = json::array();
  for (const auto& a : sim::default_algorithms()) algorithms.push_back(a.label);
  json sizes = json::array();
  for (auto n : sim::default_group_sizes()) sizes.push_back(n);
  return json{
      {"output_dir", default_output_dir()},
      {"seed", 0},
      {"workers", 1},
      {"data", {{"headlines", ""}, {"responses", ""}, {"fixture", false}, {"aliases", {{"headlines", json::object()}, {"responses", json::object()}}}}},
      {"simulation",
       {{"sizes", sizes},
        {"replicas", 1000},
        {"treatments", json::array()},
        {"mode", "label"},
        {"arms", 2},
        {"horizon", nullptr},
        {"algorithms", algorithms},
        {"hyper",
         {{"gamma", nullptr},
          {"lambda", 1.0},
          {"alpha", 1.0},
          {"exploration", "optimism"},
          {"penalty_scale", 5.0},
          {"penalty", nullptr}}},
        {"member_score", "binary"},
        {"bootstrap", {{"resamples", 1000}, {"sample_size", 1000}, {"level", 0.95}}},
        {"curve_resamples", 200},
        {"keep_traces", false}}},
      {"synth",
       {{"preset", "heterogeneous"},
        {"experts_per_treatment", 40},
        {"accuracy", 0.55},
        {"correlation", 0.18},
        {"rho", nullptr},
        {"profiles", nullptr},
        {"bias", nullptr},
        {"thresholds", nullptr},
        {"gender_delta", nullptr},
        {"minority_delta", nullptr},
        {"samples", 10000},
        {"tolerance", 0.0025}}},
      {"analyze",
       {{"source", "raw"},
        {"group_size", 36},
        {"replicas", 100},
        {"window", 100},
        {"alpha", 0.05},
        {"adjustment", "holm"},
        {"correlation", "exchangeable"},
        {"diversity_group_size", 10},
        {"diversity_groups", 200}}},
      {"stats",
       {{"input", ""},
        {"columns", json::array()},
        {"value", ""},
        {"group", ""},
        {"predictors", json::array()},
        {"cluster", ""},
        {"correlation", "exchangeable"},
        {"method", "auto"},
        {"adjustment", "holm"},
        {"resamples", 1000},
        {"sample_size", 1000},
        {"level", 0.95}}},
      {"report", {{"input_dir", nullptr}}},
  };
}

// Objects whose keys are user-defined and therefore not checked.
inline bool free_form(const std::string& pointer) {
  return pointer == "/data/aliases/headlines" || pointer == "/data/aliases/responses";
}

inline void check_keys(const json& given, const json& known, const std::string& at) {
  if (!given.is_object() || !known.is_object() || free_form(at)) return;
  for (auto it = given.begin(); it != given.end(); ++it) {
    if (!known.contains(it.key())) throw ValidationError("unknown config key '" + at + "/" + it.key() + "'");
    check_keys(it.value(), known[it.key()], at + "/" + it.key());
  }
}

// Pending overrides from flags, applied after the config file.
struct Overrides {
  std::vector<std::pair<std::string, json>> values;
  std::string config_file;

  void set(const std::string& pointer, json v) { values.emplace_back(pointer, std::move(v)); }

  json resolve() const {
    json cfg = default_config();
    if (!config_file.empty()) {
      json file;
      try {
        file = json::parse(csv::read_file(config_file));
      } catch (const json::parse_error& e) {
        throw ValidationError(config_file + ": invalid JSON: " + e.what());
      }
      if (!file.is_object()) throw ValidationError(config_file + ": config must be a JSON object");
      check_keys(file, cfg, "");
      cfg.merge_patch(file);
    }
    for (const auto& [ptr, v] : values) cfg[json::json_pointer(ptr)] = v;
    return cfg;
  }
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = csv::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline json parse_number(const std::string& flag, const std::string& v) {
  if (v == "inf" || v == "infinity") return "inf";
  if (auto i = csv::to_number<long long>(v)) return *i;
  if (auto d = csv::to_number<double>(v)) return *d;
  throw ValidationError("option " + flag + ": expected a number, got '" + v + "'");
}

// Typed accessors that turn JSON type errors into validation errors naming
// the key.
template <class T>
T get(const json& cfg, const std::string& pointer) {
  const json::json_pointer p(pointer);
  if (!cfg.contains(p)) throw ValidationError("missing config key '" + pointer + "'");
  try {
    return cfg.at(p).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + pointer + "' has the wrong type: " + cfg.at(p).dump());
  }
}

inline std::optional<double> get_optional_number(const json& cfg, const std::string& pointer) {
  const json& v = cfg.at(json::json_pointer(pointer));
  if (v.is_null()) return std::nullopt;
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ValidationError("config key '" + pointer + "' must be a number or null");
  return v.get<double>();
}

inline std::uint64_t get_seed(const json& cfg) {
  const json& v = cfg.at("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ValidationError("config key '/seed' must be a non-negative integer");
}

// Hash over everything that can change primary artifacts. Worker count and
// output location are excluded; they never affect results.
inline std::string config_hash(const json& cfg) {
  json h = cfg;
  h.erase("workers");
  h.erase("output_dir");
  return hex64(hash_string(h.dump()));
}

// -- Data ---------------------------------------------------------------------

inline Dataset load_data(const json& cfg) {
  if (get<bool>(cfg, "/data/fixture")) return synth::bundled_fixture().dataset;
  const auto h = get<std::string>(cfg, "/data/headlines");
  const auto r = get<std::string>(cfg, "/data/responses");
  if (h.empty() || r.empty())
    throw ValidationError("no dataset: pass --headlines and --responses, or --fixture");
  SchemaAliases aliases;
  const json& al = cfg.at("data").at("aliases");
  for (auto it = al.begin(); it != al.end(); ++it) {
    if (it.key() != "headlines" && it.key() != "responses")
      throw ValidationError("data.aliases takes 'headlines' and 'responses' maps");
    auto& dst = it.key() == "headlines" ? aliases.headline_columns : aliases.response_columns;
    for (auto c = it.value().begin(); c != it.value().end(); ++c) dst[c.key()] = c.value().get<std::string>();
  }
  return load_dataset(h, r, aliases);
}

// -- Simulation config --------------------------------------------------------

inline MetaCmabParams cmab_params(const json& h) {
  MetaCmabParams p;
  p.ridge = h.at("lambda").get<double>();
  p.alpha = h.at("alpha").get<double>();
  const auto e = h.at("exploration").get<std::string>();
  if (e == "optimism") p.exploration = Exploration::kOptimism;
  else if (e == "none") p.exploration = Exploration::kNone;
  else throw ValidationError("unknown exploration '" + e + "' (optimism or none)");
  return p;
}

inline AlgorithmSpec algorithm_from_json(const json& entry, const json& hyper) {
  json h = hyper;
  std::string name;
  std::string label;
  if (entry.is_string()) {
    name = entry.get<std::string>();
  } else if (entry.is_object()) {
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      if (it.key() == "name") name = it.value().get<std::string>();
      else if (it.key() == "label") label = it.value().get<std::string>();
      else if (hyper.contains(it.key())) h[it.key()] = it.value();
      else throw ValidationError("unknown algorithm setting '" + it.key() + "'");
    }
  } else {
    throw ValidationError("algorithm entries must be names or objects");
  }
  AlgorithmSpec s = AlgorithmSpec::named(name);
  if (!label.empty()) s.label = label;
  const json wrapped{{"h", h}};
  s.gamma = get_optional_number(wrapped, "/h/gamma");
  if (s.gamma && !(*s.gamma > 0.0 && *s.gamma <= 1.0)) throw ValidationError("gamma must be in (0, 1]");
  s.cmab = cmab_params(h);
  if (!(s.cmab.ridge > 0.0)) throw ValidationError("lambda must be > 0");
  if (!(s.cmab.alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  s.penalty_scale = h.at("penalty_scale").get<double>();
  s.penalty = get_optional_number(wrapped, "/h/penalty");
  if (s.penalty_scale < 0.0 || (s.penalty && *s.penalty < 0.0)) throw ValidationError("penalty must be >= 0");
  return s;
}

inline sim::SimulationConfig simulation_config(const json& cfg) {
  sim::SimulationConfig c;
  const json& s = cfg.at("simulation");
  try {
    c.sizes = s.at("sizes").get<std::vector<std::size_t>>();
    c.replicas = s.at("replicas").get<std::size_t>();
    c.treatments = s.at("treatments").get<std::vector<int>>();
    c.mode = sim::parse_mode(s.at("mode").get<std::string>());
    c.arms = s.at("arms").get<std::size_t>();
    if (!s.at("horizon").is_null()) c.horizon = s.at("horizon").get<std::size_t>();
    c.algorithms.clear();
    for (const auto& a : s.at("algorithms")) c.algorithms.push_back(algorithm_from_json(a, s.at("hyper")));
    const auto ms = s.at("member_score").get<std::string>();
    if (ms == "binary") c.member_score = sim::MemberScore::kBinary;
    else if (ms == "continuous") c.member_score = sim::MemberScore::kContinuous;
    else throw ValidationError("member_score must be binary or continuous");
    c.ci.resamples = s.at("bootstrap").at("resamples").get<std::size_t>();
    c.ci.sample_size = s.at("bootstrap").at("sample_size").get<std::size_t>();
    c.ci.level = s.at("bootstrap").at("level").get<double>();
    c.curve_resamples = s.at("curve_resamples").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad simulation config: ") + e.what());
  }
  if (!(c.ci.level > 0.0 && c.ci.level < 1.0)) throw ValidationError("bootstrap level must be in (0, 1)");
  c.seed = get_seed(cfg);
  c.workers = get<std::size_t>(cfg, "/workers");
  return c;
}

// -- Synth config -------------------------------------------------------------

template <std::size_t N>
std::array<double, N> fixed_array(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != N)
    throw ValidationError("synth." + key + " must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<double>();
  return out;
}

inline synth::CalibrationTargets synth_targets(const json& s, bool& calibrate) {
  synth::CalibrationTargets t;
  calibrate = false;
  const json& acc = s.at("accuracy");
  if (acc.is_number()) {
    t.accuracy = {acc.get<double>(), acc.get<double>(), acc.get<double>()};
    calibrate = true;
  } else if (acc.is_array()) {
    t.accuracy = fixed_array<3>(acc, "accuracy");
    calibrate = true;
  } else if (!acc.is_null()) {
    throw ValidationError("synth.accuracy must be a number, an array of 3 or null");
  }
  if (!s.at("correlation").is_null()) {
    t.correlation = s.at("correlation").get<double>();
    calibrate = true;
  }
  t.samples = s.at("samples").get<std::size_t>();
  t.tolerance = s.at("tolerance").get<double>();
  return t;
}

inline synth::SynthConfig synth_config(const json& cfg) {
  const json& s = cfg.at("synth");
  synth::SynthConfig c;
  try {
    c = synth::preset(s.at("preset").get<std::string>(), get_seed(cfg));
    c.experts_per_treatment = s.at("experts_per_treatment").get<std::size_t>();
    if (!s.at("rho").is_null()) c.rho = s.at("rho").get<double>();
    if (!s.at("profiles").is_null()) {
      c.profiles.clear();
      for (const auto& p : s.at("profiles"))
        c.profiles.push_back({p.value("name", std::string("profile")), p.at("share").get<double>(),
                              fixed_array<3>(p.at("delta"), "profiles.delta")});
    }
    if (!s.at("bias").is_null()) {
      const json& b = s.at("bias");
      if (!b.is_array() || b.size() != 3) throw ValidationError("synth.bias must be 3 rows of [positive, negative]");
      for (std::size_t i = 0; i < 3; ++i) c.bias[i] = fixed_array<2>(b[i], "bias");
    }
    if (!s.at("thresholds").is_null()) c.thresholds = fixed_array<4>(s.at("thresholds"), "thresholds");
    if (!s.at("gender_delta").is_null()) {
      const json& g = s.at("gender_delta");
      if (!g.is_array() || g.size() != 2) throw ValidationError("synth.gender_delta must be [male[3], female[3]]");
      for (std::size_t i = 0; i < 2; ++i) c.gender_delta[i] = fixed_array<3>(g[i], "gender_delta");
    }
    if (!s.at("minority_delta").is_null()) c.minority_delta = fixed_array<3>(s.at("minority_delta"), "minority_delta");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad synth config: ") + e.what());
  }
  c.validate();
  return c;
}

// -- Output helpers -----------------------------------------------------------

inline std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Session {
  json cfg;
  std::string command;
  io::OutputDir out;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Session(json c, std::string cmd)
      : cfg(std::move(c)),
        command(std::move(cmd)),
        out(get<std::string>(cfg, "/output_dir"), command, config_hash(cfg)) {
    io::OutputDir::write_raw(out.root() / "effective_config.json", cfg.dump(2) + "\n");
  }

  // Timestamps live only here.
  void finish(const json& extra = json::object()) const {
    json info{{"command", command},
              {"config_hash", out.config_hash()},
              {"finished_utc", now_utc()},
              {"elapsed_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
              {"workers", cfg.at("workers")}};
    for (auto it = extra.begin(); it != extra.end(); ++it) info[it.key()] = it.value();
    io::OutputDir::write_raw(out.root() / "run_info.json", info.dump(2) + "\n");
  }
};

inline std::string to_csv(const std::function<void(csv::Writer&)>& fill) {
  std::ostringstream s;
  csv::Writer w(s);
  fill(w);
  return s.str();
}

inline std::string opt_num(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

// -- simulate -----------------------------------------------------------------

inline int cmd_simulate(const json& cfg, std::ostream& log) {
  const Dataset data = load_data(cfg);
  sim::SimulationConfig sc = simulation_config(cfg);
  Session session(cfg, "simulate");
  session.out.set_provenance(data.provenance());
  if (get<bool>(cfg, "/simulation/keep_traces")) sc.trace_dir = session.out.root() / "traces";

  const auto result = sim::run_campaign(sc, data);
  const auto table = sim::compute_metrics(result);
  std::ostringstream csv_text;
  table.write_csv(csv_text);

  json algos = json::array();
  for (const auto& a : sc.algorithms) {
    json j{{"label", a.label}, {"kind", std::string(to_string(a.kind))}};
    if (a.kind == AlgorithmKind::kExp4) j["gamma"] = a.gamma ? json(*a.gamma) : json("finite-horizon default");
    if (a.kind == AlgorithmKind::kMetaCmab || a.kind == AlgorithmKind::kExpertiseTree) {
      j["lambda"] = a.cmab.ridge;
      j["alpha"] = a.cmab.exploration == Exploration::kNone ? 0.0 : a.cmab.alpha;
    }
    if (a.kind == AlgorithmKind::kExpertiseTree) {
      j["penalty"] = a.penalty ? (std::isinf(*a.penalty) ? json("inf") : json(*a.penalty))
                               : json("scale " + csv::format_double(a.penalty_scale));
    }
    algos.push_back(j);
  }
  json structures = json::array();
  for (int k = 0; k < kNumTreeStructures; ++k) structures.push_back(std::string(to_string(TreeStructure(k))));
  session.out.write("metrics.csv", csv_text.str(),
                    {{"mode", sim::to_string(sc.mode)},
                     {"treatment", table.treatment},
                     {"headlines_per_round", table.headlines_per_round},
                     {"replicas_per_cell", result.treatments.size() * sc.replicas},
                     {"algorithms", algos},
                     {"member_score", sc.member_score == sim::MemberScore::kBinary ? "binary" : "continuous"},
                     {"round_column",
                      {{"regret", "round index (1-based)"},
                       {"regret_headlines", "headlines revealed so far"},
                       {"win_pct", "member rank, 1 = best in hindsight"},
                       {"structure_share", "ExpertiseTree structure id"}}},
                     {"structure_ids", structures},
                     {"ci", {{"method", "percentile bootstrap"},
                             {"resamples", sc.ci.resamples},
                             {"curve_resamples", sc.curve_resamples},
                             {"sample_size", sc.ci.sample_size},
                             {"level", sc.ci.level}}}});
  session.finish({{"replicas_run", result.replica_count()}});

  log << "algorithm,N,accuracy,terminal_regret\n";
  for (const auto& c : table.cells)
    log << c.algorithm << ',' << c.size << ',' << csv::format_double(c.accuracy.mean) << ','
        << csv::format_double(c.terminal_regret.mean) << '\n';
  log << "wrote " << (session.out.root() / "metrics.csv").string() << '\n';
  return kExitOk;
}

// -- synth --------------------------------------------------------------------

inline int cmd_synth(const json& cfg, std::ostream& log) {
  synth::SynthConfig sc = synth_config(cfg);
  bool calibrate = false;
  const auto targets = synth_targets(cfg.at("synth"), calibrate);
  json calib = nullptr;
  if (calibrate) {
    const auto rep = synth::calibrate(sc, targets);
    sc = rep.config;
    calib = {{"scale", rep.scale}, {"accuracy", rep.accuracy}, {"rho", rep.config.rho}, {"probes", rep.probes}};
    if (targets.correlation) calib["correlation"] = rep.correlation;
  }
  const auto pop = synth::generate(sc);
  Session session(cfg, "synth");
  std::ostringstream h, r;
  write_headlines(pop.dataset, h);
  write_responses(pop.dataset, r);
  json profiles = json::array();
  for (const auto& p : sc.profiles) profiles.push_back({{"name", p.name}, {"share", p.share}, {"delta", p.delta}});
  const json extra{{"seed", sc.seed}, {"rho", sc.rho}, {"profiles", profiles}, {"calibration", calib}};
  session.out.write("headlines.csv", h.str(), extra);
  session.out.write("responses.csv", r.str(), extra);
  session.finish();
  log << "wrote " << pop.dataset.participants().size() << " participants, " << pop.dataset.responses().size()
      << " responses to " << session.out.root().string() << '\n';
  return kExitOk;
}

// -- analyze ------------------------------------------------------------------

inline const std::vector<std::string>& analyses() {
  static const std::vector<std::string> a = {"framing", "groupbias", "demographics", "calibration", "timing",
                                             "diversity"};
  return a;
}

inline bias::HeadlineSamples analysis_source(const Dataset& d, const json& cfg, json& meta) {
  const auto src = get<std::string>(cfg, "/analyze/source");
  if (src == "raw") {
    meta["source"] = "raw";
    return bias::raw_samples(d);
  }
  AlgorithmSpec spec = algorithm_from_json(json(src), cfg.at("simulation").at("hyper"));
  bias::PredictionProtocol p;
  p.group_size = get<std::size_t>(cfg, "/analyze/group_size");
  p.replicas = get<std::size_t>(cfg, "/analyze/replicas");
  p.seed = get_seed(cfg);
  p.workers = get<std::size_t>(cfg, "/workers");
  meta["source"] = src;
  meta["protocol"] = {{"mode", "label"}, {"group_size", p.group_size}, {"replicas_per_treatment", p.replicas}};
  return bias::prediction_samples(d, spec, p);
}

inline int cmd_analyze(const json& cfg, const std::string& which, std::ostream& log) {
  std::vector<std::string> todo;
  if (which == "all") todo = analyses();
  else if (std::find(analyses().begin(), analyses().end(), which) != analyses().end()) todo = {which};
  else throw ValidationError("unknown analysis '" + which + "'");

  const Dataset d = load_data(cfg);
  Session session(cfg, "analyze");
  session.out.set_provenance(d.provenance());
  const double alpha = get<double>(cfg, "/analyze/alpha");
  const auto adjust = stats::parse_adjustment(get<std::string>(cfg, "/analyze/adjustment"));
  const auto corr_name = get<std::string>(cfg, "/analyze/correlation");
  stats::WorkingCorrelation corr;
  if (corr_name == "exchangeable") corr = stats::WorkingCorrelation::kExchangeable;
  else if (corr_name == "independence") corr = stats::WorkingCorrelation::kIndependence;
  else throw ValidationError("unknown working correlation '" + corr_name + "'");

  std::optional<bias::HeadlineSamples> samples;
  json source_meta;
  auto source = [&]() -> const bias::HeadlineSamples& {
    if (!samples) samples = analysis_source(d, cfg, source_meta);
    return *samples;
  };

  for (const auto& a : todo) {
    if (a == "framing") {
      const auto fr = bias::framing_analysis(d, source(), alpha);
      const auto text = to_csv([&](csv::Writer& w) {
        w.row("pair_id", "category", "sentiment", "original_id", "altered_id", "mean_original", "mean_altered",
              "n_original", "n_altered", "quadrant", "p_value");
        for (const auto& p : fr.points)
          w.row(p.pair.value, to_string(p.category), to_string(p.sentiment), d.headlines()[p.original].id.value,
                d.headlines()[p.altered].id.value, p.mean_original, p.mean_altered, p.n_original, p.n_altered,
                bias::to_string(p.quadrant), p.p_value);
      });
      json meta = source_meta;
      meta["quadrants"] = {{"Q1", fr.count(bias::Quadrant::kQ1)}, {"Q2", fr.count(bias::Quadrant::kQ2)},
                           {"Q3", fr.count(bias::Quadrant::kQ3)}, {"Q4", fr.count(bias::Quadrant::kQ4)},
                           {"boundary", fr.count(bias::Quadrant::kBoundary)}};
      meta["framing_fraction"] = fr.framing_fraction();
      meta["alpha"] = alpha;
      session.out.write("framing.csv", text, meta);
      log << "framing: " << fr.points.size() << " pairs, Q1=" << fr.counts[0] << " Q2=" << fr.counts[1]
          << " Q3=" << fr.counts[2] << " Q4=" << fr.counts[3] << " boundary=" << fr.counts[4]
          << ", framing fraction " << csv::format_double(fr.framing_fraction()) << '\n';
    } else if (a == "groupbias") {
      const auto t = bias::group_error_table(d, source(), alpha, adjust);
      session.out.write("group_errors.csv", to_csv([&](csv::Writer& w) {
                          w.row("category", "sentiment", "genuine", "headlines", "observations", "mean_error", "sd");
                          for (const auto& c : t.cells)
                            w.row(to_string(c.category), to_string(c.sentiment), c.genuine ? 1 : 0, c.count(),
                                  c.observations, c.mean_error, c.sd);
                        }),
                        source_meta);
      session.out.write("group_tests.csv", to_csv([&](csv::Writer& w) {
                          w.row("category", "test", "comparison", "statistic", "df", "p_value", "p_adjusted",
                                "effect_size", "note");
                          for (const auto& ct : t.tests) {
                            const std::string cat(to_string(ct.category));
                            if (!ct.omnibus) {
                              w.row(cat, "kruskal", "", "", "", "", "", "", "not enough cells; " + ct.note);
                              continue;
                            }
                            const auto& o = *ct.omnibus;
                            w.row(cat, "kruskal", "all cells", o.statistic, o.df ? std::to_string(*o.df) : "",
                                  o.p_value, o.p_value, opt_num(o.effect_size), o.warning + ct.note);
                            for (const auto& p : ct.posthoc)
                              w.row(cat, "dunn",
                                    t.cells[ct.cells[p.i]].label() + " vs " + t.cells[ct.cells[p.j]].label(), p.z,
                                    "", p.p_value, p.p_adjusted, "", stats::to_string(adjust));
                          }
                        }),
                        source_meta);
      const auto gee = bias::headline_error_gee(d, source(), corr);
      json gm = source_meta;
      gm["working_correlation"] = stats::to_string(gee.correlation);
      gm["alpha"] = gee.alpha;
      gm["clusters"] = gee.clusters;
      gm["converged"] = gee.converged;
      gm["iterations"] = gee.iterations;
      session.out.write("gee_errors.csv", to_csv([&](csv::Writer& w) {
                          w.row("term", "estimate", "se", "z", "p_value", "ci_lo", "ci_hi");
                          for (const auto& g : gee.terms) w.row(g.name, g.estimate, g.se, g.z, g.p_value, g.ci_lo, g.ci_hi);
                        }),
                        gm);
      for (const auto& ct : t.tests)
        if (ct.omnibus)
          log << "groupbias " << to_string(ct.category) << ": H=" << csv::format_double(ct.omnibus->statistic)
              << " p=" << csv::format_double(ct.omnibus->p_value) << '\n';
    } else if (a == "demographics") {
      const auto rep = bias::demographic_performance(d, corr);
      session.out.write("demographics.csv", to_csv([&](csv::Writer& w) {
                          w.row("split", "category", "group_0", "group_1", "accuracy_0", "accuracy_1",
                                "responses_0", "responses_1", "beta", "se", "p_value", "p_bonferroni", "warning");
                          for (const auto& c : rep.cells) {
                            const auto g = bias::split_groups(c.split);
                            w.row(bias::to_string(c.split), to_string(c.category), g[0], g[1], c.accuracy[0],
                                  c.accuracy[1], c.responses[0], c.responses[1],
                                  opt_num(c.effect ? std::optional(c.effect->estimate) : std::nullopt),
                                  opt_num(c.effect ? std::optional(c.effect->se) : std::nullopt),
                                  opt_num(c.effect ? std::optional(c.effect->p_value) : std::nullopt),
                                  opt_num(c.effect ? std::optional(c.effect->p_adjusted) : std::nullopt), c.warning);
                          }
                        }),
                        {{"model", "GEE gaussian/identity, clustered by participant"},
                         {"working_correlation", stats::to_string(corr)},
                         {"adjustment", "bonferroni across headline categories within a split"},
                         {"warnings", rep.warnings}});
      for (const auto& wmsg : rep.warnings) log << "demographics: " << wmsg << '\n';
    } else if (a == "calibration") {
      const auto rep = bias::confidence_calibration(d);
      session.out.write("calibration.csv", to_csv([&](csv::Writer& w) {
                          w.row("kind", "attribute", "group", "level", "count", "value");
                          for (const auto& b : rep.buckets) w.row("accuracy", "all", "all", b.level, b.count, b.accuracy);
                          for (const auto& g : rep.groups)
                            for (std::size_t i = 0; i < 3; ++i)
                              w.row("frequency", g.attribute, g.group, bias::kConfidenceLevels[i], g.responses,
                                    g.frequency[i]);
                          const auto votes = bias::crowd_votes(d);
                          w.row("vote", "mv", "all", "", votes.mv.size(), votes.mv_accuracy());
                          w.row("vote", "cwmv", "all", "", votes.cwmv.size(), votes.cwmv_accuracy());
                          if (votes.wilcoxon)
                            w.row("vote", "wilcoxon_p", "cwmv_vs_mv", "", votes.mv.size(), votes.wilcoxon->p_value);
                        }));
    } else if (a == "timing") {
      const auto window = get<std::size_t>(cfg, "/analyze/window");
      const auto curve = bias::response_time_curve(d, window);
      session.out.write("timing.csv", to_csv([&](csv::Writer& w) {
                          w.row("window_end", "time_ms", "accuracy");
                          for (std::size_t i = 0; i < curve.size(); ++i)
                            w.row(i + window, curve[i].time_ms, curve[i].accuracy);
                        }),
                        {{"window", window}});
    } else if (a == "diversity") {
      bias::DiversityOptions o;
      o.group_size = get<std::size_t>(cfg, "/analyze/diversity_group_size");
      o.groups_per_treatment = get<std::size_t>(cfg, "/analyze/diversity_groups");
      o.seed = get_seed(cfg);
      const auto rep = bias::diversity_analysis(d, o);
      session.out.write("diversity.csv", to_csv([&](csv::Writer& w) {
                          w.row("metric", "value", "count");
                          w.row("correlation_men", rep.men.mean(), rep.men.pairs);
                          w.row("correlation_women", rep.women.mean(), rep.women.pairs);
                          w.row("correlation_between", rep.between.mean(), rep.between.pairs);
                          w.row("correlation_mixed", rep.mixed(), rep.men.pairs + rep.women.pairs + rep.between.pairs);
                          for (const auto& g : rep.groups) w.row("cwmv_accuracy_" + g.composition, g.mean(), g.accuracy.size());
                          if (rep.women_vs_men) {
                            w.row("mwu_p_women_vs_men", rep.women_vs_men->p_value, "");
                            w.row("mwu_p_mixed_vs_men", rep.mixed_vs_men->p_value, "");
                            w.row("mwu_p_mixed_vs_women", rep.mixed_vs_women->p_value, "");
                          }
                        }),
                        {{"group_size", o.group_size}, {"groups_per_treatment", o.groups_per_treatment},
                         {"warnings", rep.warnings}});
      log << "diversity: men " << csv::format_double(rep.men.mean()) << ", women "
          << csv::format_double(rep.women.mean()) << ", mixed " << csv::format_double(rep.mixed()) << '\n';
    }
  }
  session.finish({{"analyses", todo}});
  return kExitOk;
}

// -- stats --------------------------------------------------------------------

inline std::vector<std::optional<double>> numeric_column(const csv::Table& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<std::optional<double>> out;
  for (const auto& r : t.rows()) {
    const auto& f = r.fields[c];
    if (is_na_token(csv::trim(f))) {
      out.push_back(std::nullopt);
      continue;
    }
    auto v = csv::to_number<double>(f);
    if (!v) throw ValidationError(t.source(), r.line, "column '" + name + "': not a number: '" + f + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> present(const std::vector<std::optional<double>>& v) {
  std::vector<double> out;
  for (const auto& x : v)
    if (x) out.push_back(*x);
  return out;
}

// Groups for k-sample tests: either --value/--group or one group per column.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> sample_groups(const csv::Table& t,
                                                                                           const json& s) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> groups;
  const auto value = s.at("value").get<std::string>();
  if (!value.empty()) {
    const auto group = s.at("group").get<std::string>();
    if (group.empty()) throw ValidationError("--value needs --group");
    const auto v = numeric_column(t, value);
    const std::size_t gc = t.column(group);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i]) continue;
      const std::string key(csv::trim(t.rows()[i].fields[gc]));
      auto [it, fresh] = index.emplace(key, groups.size());
      if (fresh) {
        names.push_back(key);
        groups.emplace_back();
      }
      groups[it->second].push_back(*v[i]);
    }
  } else {
    for (const auto& c : s.at("columns").get<std::vector<std::string>>()) {
      names.push_back(c);
      groups.push_back(present(numeric_column(t, c)));
    }
  }
  return {names, groups};
}

inline stats::PMethod parse_method(const std::string& m) {
  if (m == "auto") return stats::PMethod::kAuto;
  if (m == "exact") return stats::PMethod::kExact;
  if (m == "normal") return stats::PMethod::kNormal;
  throw ValidationError("unknown p-value method '" + m + "' (auto, exact, normal)");
}

inline int cmd_stats(const json& cfg, const std::string& test, std::ostream& log) {
  const json& s = cfg.at("stats");
  const auto input = s.at("input").get<std::string>();
  if (input.empty()) throw ValidationError("stats needs --input");
  const csv::Table t = csv::Table::from_file(input);
  const auto columns = s.at("columns").get<std::vector<std::string>>();
  const auto method = parse_method(s.at("method").get<std::string>());
  std::string text;

  auto result_rows = [&](const std::string& name, const std::vector<std::string>& groups,
                         const stats::TestResult& r) {
    return to_csv([&](csv::Writer& w) {
      w.row("test", "groups", "statistic", "p_value", "df", "effect_size", "n", "exact", "warning");
      std::string n, g;
      for (std::size_t i = 0; i < r.group_sizes.size(); ++i) n += (i ? ";" : "") + std::to_string(r.group_sizes[i]);
      for (std::size_t i = 0; i < groups.size(); ++i) g += (i ? ";" : "") + groups[i];
      w.row(name, g, r.statistic, r.p_value, r.df ? std::to_string(*r.df) : "", opt_num(r.effect_size), n,
            r.exact ? 1 : 0, r.warning);
    });
  };

  if (test == "wilcoxon") {
    if (columns.size() != 2) throw ValidationError("wilcoxon needs --columns a,b");
    const auto a = numeric_column(t, columns[0]), b = numeric_column(t, columns[1]);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] && b[i]) x.push_back(*a[i]), y.push_back(*b[i]);
    text = result_rows("wilcoxon", columns, stats::wilcoxon_signed_rank(x, y, method));
  } else if (test == "mannwhitney") {
    auto [names, groups] = sample_groups(t, s);
    if (groups.size() != 2) throw ValidationError("mannwhitney needs exactly two samples");
    text = result_rows("mannwhitney", names, stats::mann_whitney_u(groups[0], groups[1], method));
  } else if (test == "kruskal") {
    auto [names, groups] = sample_groups(t, s);
    text = result_rows("kruskal", names, stats::kruskal_wallis(groups));
  } else if (test == "dunn") {
    auto [names, groups] = sample_groups(t, s);
    const auto adj = stats::parse_adjustment(s.at("adjustment").get<std::string>());
    const auto res = stats::dunn_posthoc(groups, adj);
    text = to_csv([&](csv::Writer& w) {
      w.row("group_a", "group_b", "z", "p_value", "p_adjusted", "adjustment");
      for (const auto& p : res) w.row(names[p.i], names[p.j], p.z, p.p_value, p.p_adjusted, stats::to_string(adj));
    });
  } else if (test == "gee") {
    const auto yname = s.at("value").get<std::string>();
    const auto preds = s.at("predictors").get<std::vector<std::string>>();
    const auto cname = s.at("cluster").get<std::string>();
    if (yname.empty() || cname.empty()) throw ValidationError("gee needs --value, --predictors and --cluster");
    const auto y = numeric_column(t, yname);
    std::vector<std::vector<std::optional<double>>> xs;
    for (const auto& p : preds) xs.push_back(numeric_column(t, p));
    const std::size_t cc = t.column(cname);
    std::map<std::string, std::int64_t> ids;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < y.size(); ++i) {
      bool ok = y[i].has_value();
      for (const auto& x : xs) ok = ok && x[i].has_value();
      if (ok) keep.push_back(i);
    }
    Eigen::VectorXd ey(static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXd ex(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(preds.size() + 1));
    std::vector<std::int64_t> cl;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto i = keep[k];
      const auto r = static_cast<Eigen::Index>(k);
      ey(r) = *y[i];
      ex(r, 0) = 1.0;
      for (std::size_t j = 0; j < xs.size(); ++j) ex(r, static_cast<Eigen::Index>(j + 1)) = *xs[j][i];
      const std::string key(csv::trim(t.rows()[i].fields[cc]));
      cl.push_back(ids.emplace(key, static_cast<std::int64_t>(ids.size())).first->second);
    }
    std::vector<std::string> names = {"intercept"};
    names.insert(names.end(), preds.begin(), preds.end());
    stats::GeeOptions o;
    const auto wc = s.at("correlation").get<std::string>();
    if (wc == "independence") o.correlation = stats::WorkingCorrelation::kIndependence;
    else if (wc != "exchangeable") throw ValidationError("unknown working correlation '" + wc + "'");
    o.adjustment = stats::parse_adjustment(s.at("adjustment").get<std::string>());
    const auto m = stats::gee_fit(ey, ex, cl, names, o);
    text = to_csv([&](csv::Writer& w) {
      w.row("term", "estimate", "se", "z", "p_value", "p_adjusted", "ci_lo", "ci_hi", "working_correlation",
            "alpha", "clusters", "converged");
      for (const auto& g : m.terms)
        w.row(g.name, g.estimate, g.se, g.z, g.p_value, g.p_adjusted, g.ci_lo, g.ci_hi,
              stats::to_string(m.correlation), m.alpha, m.clusters, m.converged ? 1 : 0);
    });
  } else if (test == "bootstrap") {
    if (columns.size() != 1) throw ValidationError("bootstrap needs --columns with one column");
    const auto v = present(numeric_column(t, columns[0]));
    stats::BootstrapOptions o;
    o.resamples = s.at("resamples").get<std::size_t>();
    o.sample_size = s.at("sample_size").get<std::size_t>();
    o.level = s.at("level").get<double>();
    Rng rng(mix_seed({get_seed(cfg), hash_string("stats-bootstrap")}));
    const auto ci = stats::bootstrap_ci(v, rng, o);
    text = to_csv([&](csv::Writer& w) {
      w.row("column", "n", "mean", "ci_lo", "ci_hi", "level", "resamples", "sample_size");
      w.row(columns[0], v.size(), ci.mean, ci.lo, ci.hi, o.level, o.resamples, o.sample_size);
    });
  } else {
    throw ValidationError("unknown test '" + test + "'");
  }
  Session session(cfg, "stats");
  session.out.write("stats_" + test + ".csv", text, {{"input", input}});
  session.finish();
  log << text;
  return kExitOk;
}

// -- report -------------------------------------------------------------------

inline std::string markdown_table(const std::vector<std::string>& header,
                                  const std::vector<std::vector<std::string>>& rows) {
  std::string s = "|";
  for (const auto& h : header) s += " " + h + " |";
  s += "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) s += "---|";
  s += "\n";
  for (const auto& r : rows) {
    s += "|";
    for (const auto& c : r) s += " " + c + " |";
    s += "\n";
  }
  return s;
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct MetricsData {
  // (algorithm, metric) -> N -> round -> (value, lo, hi)
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::map<long, std::array<double, 3>>>> v;
  std::vector<std::string> algorithms;
  std::vector<std::size_t> sizes;
};

inline MetricsData read_metrics(const std::filesystem::path& p) {
  const csv::Table t = csv::Table::from_file(p.string());
  MetricsData m;
  const auto ca = t.column("algorithm"), cn = t.column("N"), cm = t.column("metric"), cr = t.column("round"),
             cv = t.column("value"), cl = t.column("ci_lo"), ch = t.column("ci_hi");
  std::set<std::size_t> sizes;
  for (const auto& r : t.rows()) {
    const auto n = csv::to_number<std::size_t>(r.fields[cn]);
    const auto v = csv::to_number<double>(r.fields[cv]);
    const auto lo = csv::to_number<double>(r.fields[cl]);
    const auto hi = csv::to_number<double>(r.fields[ch]);
    if (!n || !v || !lo || !hi) throw ValidationError(t.source(), r.line, "malformed metrics row");
    const long round = csv::to_number<long>(r.fields[cr]).value_or(0);
    const auto& alg = r.fields[ca];
    if (std::find(m.algorithms.begin(), m.algorithms.end(), alg) == m.algorithms.end()) m.algorithms.push_back(alg);
    sizes.insert(*n);
    m.v[{alg, r.fields[cm]}][*n][round] = {*v, *lo, *hi};
  }
  m.sizes.assign(sizes.begin(), sizes.end());
  return m;
}

inline int cmd_report(const json& cfg, std::ostream& log) {
  const json& in = cfg.at("report").at("input_dir");
  const std::filesystem::path input = in.is_null() ? get<std::string>(cfg, "/output_dir") : in.get<std::string>();
  const std::vector<std::string> known = {"metrics.csv", "framing.csv", "group_errors.csv", "demographics.csv"};
  bool any = false;
  for (const auto& k : known) any = any || std::filesystem::exists(input / k);
  if (!any)
    throw ValidationError("report: missing prerequisite output in " + input.string() +
                          " (expected metrics.csv from simulate, or framing.csv / group_errors.csv / "
                          "demographics.csv from analyze)");
  Session session(cfg, "report");
  std::string md = "# Collective decision-making report\n\n";
  std::vector<std::string> figures;
  auto figure = [&](const std::string& name, const std::string& svg_text, const std::string& caption) {
    session.out.write(name, svg_text);
    md += "![" + caption + "](" + name + ")\n\n";
    figures.push_back(name);
  };

  if (std::filesystem::exists(input / "metrics.csv")) {
    const auto m = read_metrics(input / "metrics.csv");
    auto curve_over_n = [&](const std::string& metric) {
      std::vector<svg::Series> ss;
      for (const auto& a : m.algorithms) {
        auto it = m.v.find({a, metric});
        if (it == m.v.end()) continue;
        svg::Series s{a, {}, {}, {}, {}};
        for (const auto& [n, rounds] : it->second) {
          const auto& x = rounds.begin()->second;
          s.x.push_back(static_cast<double>(n));
          s.y.push_back(x[0]);
          s.lo.push_back(x[1]);
          s.hi.push_back(x[2]);
        }
        ss.push_back(std::move(s));
      }
      return ss;
    };
    md += "## Performance by group size\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& a : m.algorithms)
      for (std::size_t n : m.sizes) {
        auto acc = m.v.find({a, "accuracy"});
        auto reg = m.v.find({a, "terminal_regret"});
        auto best = m.v.find({a, "best_member_accuracy"});
        if (acc == m.v.end() || !acc->second.count(n)) continue;
        const auto& x = acc->second.at(n).begin()->second;
        const auto& r = reg->second.at(n).begin()->second;
        rows.push_back({a, std::to_string(n), fixed3(x[0]) + " [" + fixed3(x[1]) + ", " + fixed3(x[2]) + "]",
                        fixed3(best->second.at(n).begin()->second[0]),
                        fixed3(r[0]) + " [" + fixed3(r[1]) + ", " + fixed3(r[2]) + "]"});
      }
    md += markdown_table({"algorithm", "N", "accuracy", "best member", "terminal regret"}, rows) + "\n";
    auto acc = curve_over_n("accuracy");
    if (!m.algorithms.empty()) {
      auto best = curve_over_n("best_member_accuracy");
      if (!best.empty()) {
        best.front().name = "best member";
        best.front().lo.clear();
        best.front().hi.clear();
        acc.push_back(best.front());
      }
    }
    figure("accuracy.svg", svg::line_chart("Accuracy", "group size N", "accuracy", acc), "accuracy by group size");
    figure("terminal_regret.svg",
           svg::line_chart("Terminal regret", "group size N", "R_T", curve_over_n("terminal_regret"), 0.0),
           "terminal regret by group size");
    std::vector<std::size_t> curve_sizes = {m.sizes.front()};
    if (m.sizes.back() != m.sizes.front()) curve_sizes.push_back(m.sizes.back());
    for (std::size_t n : curve_sizes) {
      std::vector<svg::Series> ss;
      for (const auto& a : m.algorithms) {
        auto it = m.v.find({a, "regret"});
        if (it == m.v.end() || !it->second.count(n)) continue;
        svg::Series s{a, {}, {}, {}, {}};
        for (const auto& [round, x] : it->second.at(n)) {
          s.x.push_back(static_cast<double>(round));
          s.y.push_back(x[0]);
          s.lo.push_back(x[1]);
          s.hi.push_back(x[2]);
        }
        ss.push_back(std::move(s));
      }
      figure("regret_N" + std::to_string(n) + ".svg",
             svg::line_chart("Instantaneous regret, N = " + std::to_string(n), "round", "R_t", ss, 0.0),
             "regret curve N=" + std::to_string(n));
    }
    for (const auto& a : m.algorithms) {
      auto it = m.v.find({a, "win_pct"});
      if (it == m.v.end()) continue;
      std::vector<std::string> labels;
      std::vector<std::vector<double>> vals;
      for (const auto& [n, ranks] : it->second) {
        labels.push_back("N=" + std::to_string(n));
        std::vector<double> row;
        for (const auto& [q, x] : ranks) row.push_back(x[0]);
        vals.push_back(std::move(row));
      }
      figure("win_" + a + ".svg",
             svg::heatmap("Win percentage: " + a, "member rank (best first)", "", labels, vals),
             "win percentage " + a);
    }
    for (const auto& a : m.algorithms) {
      auto it = m.v.find({a, "structure_share"});
      if (it == m.v.end()) continue;
      std::vector<svg::Series> ss;
      for (int k = 0; k < kNumTreeStructures; ++k) {
        svg::Series s{std::string(to_string(TreeStructure(k))), {}, {}, {}, {}};
        for (const auto& [n, ids] : it->second) {
          auto f = ids.find(k);
          if (f == ids.end()) continue;
          s.x.push_back(static_cast<double>(n));
          s.y.push_back(f->second[0]);
        }
        ss.push_back(std::move(s));
      }
      figure("structures_" + a + ".svg", svg::line_chart("Learned structures: " + a, "group size N", "share", ss),
             "structure prevalence " + a);
    }
  }

  if (std::filesystem::exists(input / "framing.csv")) {
    const csv::Table t = csv::Table::from_file((input / "framing.csv").string());
    std::vector<double> o, al;
    std::map<std::string, int> counts;
    for (const auto& r : t.rows()) {
      o.push_back(csv::to_number<double>(r.fields[t.column("mean_original")]).value_or(0.5));
      al.push_back(csv::to_number<double>(r.fields[t.column("mean_altered")]).value_or(0.5));
      ++counts[r.fields[t.column("quadrant")]];
    }
    md += "## Framing\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const char* q : {"Q1", "Q2", "Q3", "Q4", "boundary"}) rows.push_back({q, std::to_string(counts[q])});
    md += markdown_table({"quadrant", "pairs"}, rows) + "\n";
    figure("framing.svg", svg::quadrant_scatter("Framing quadrants", o, al), "framing scatter");
  }

  if (std::filesystem::exists(input / "group_errors.csv")) {
    const csv::Table t = csv::Table::from_file((input / "group_errors.csv").string());
    std::vector<svg::Bar> bars;
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : t.rows()) {
      const std::string label = r.fields[t.column("category")] + " " + r.fields[t.column("sentiment")].substr(0, 3) +
                                (r.fields[t.column("genuine")] == "1" ? " gen" : " alt");
      const double v = csv::to_number<double>(r.fields[t.column("mean_error")]).value_or(0.0);
      bars.push_back({label, v, v, v});
      rows.push_back({label, fixed3(v), r.fields[t.column("headlines")]});
    }
    md += "## Error by headline group\n\n" + markdown_table({"cell", "mean error", "headlines"}, rows) + "\n";
    figure("group_errors.svg", svg::bar_chart("Mean error by headline group", "error", bars), "group errors");
  }

  if (std::filesystem::exists(input / "demographics.csv")) {
    const csv::Table t = csv::Table::from_file((input / "demographics.csv").string());
    std::vector<svg::Bar> bars;
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : t.rows()) {
      const auto sp = r.fields[t.column("split")], cat = r.fields[t.column("category")];
      for (int g = 0; g < 2; ++g) {
        const auto name = r.fields[t.column("group_" + std::to_string(g))];
        const double v = csv::to_number<double>(r.fields[t.column("accuracy_" + std::to_string(g))]).value_or(0.0);
        bars.push_back({cat.substr(0, 3) + " " + name, v, v, v});
      }
      rows.push_back({sp, cat, fixed3(csv::to_number<double>(r.fields[t.column("accuracy_0")]).value_or(0.0)),
                      fixed3(csv::to_number<double>(r.fields[t.column("accuracy_1")]).value_or(0.0)),
                      r.fields[t.column("p_bonferroni")]});
    }
    md += "## Demographic accuracy\n\n" +
          markdown_table({"split", "headline category", "group 0", "group 1", "p (Bonferroni)"}, rows) + "\n";
    figure("demographics.svg", svg::bar_chart("Accuracy by demographic group", "accuracy", bars), "demographics");
  }

  session.out.write("report.md", md);
  session.finish({{"figures", figures}});
  log << "wrote report with " << figures.size() << " figures to " << session.out.root().string() << '\n';
  return kExitOk;
}

// -- Entry point --------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Collective decision-making benchmark: aggregation, simulation and bias analysis"};
  app.name("cdm");
  app.require_subcommand(1);
  Overrides ov;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", ov.config_file, "JSON run config (flags override it)");
    s->add_option_function<std::string>("--out", [&](const std::string& v) { ov.set("/output_dir", v); },
                                         "output directory (default $CDM_OUTPUT_DIR or ./out)");
    s->add_option_function<std::string>("--seed", [&](const std::string& v) { ov.set("/seed", parse_number("--seed", v)); },
                                        "master seed");
    s->add_option_function<std::string>("--workers", [&](const std::string& v) { ov.set("/workers", parse_number("--workers", v)); },
                                        "worker threads, 0 = all cores");
  };
  auto data = [&](CLI::App* s) {
    s->add_option_function<std::string>("--headlines", [&](const std::string& v) { ov.set("/data/headlines", v); },
                                        "headlines.csv");
    s->add_option_function<std::string>("--responses", [&](const std::string& v) { ov.set("/data/responses", v); },
                                        "responses.csv");
    s->add_flag_function("--fixture", [&](std::int64_t) { ov.set("/data/fixture", true); },
                         "use the bundled synthetic dataset");
  };
  auto number = [&](CLI::App* s, const std::string& flag, const std::string& ptr, const std::string& help) {
    s->add_option_function<std::string>(flag, [&, flag, ptr](const std::string& v) { ov.set(ptr, parse_number(flag, v)); },
                                        help);
  };
  auto text = [&](CLI::App* s, const std::string& flag, const std::string& ptr, const std::string& help) {
    s->add_option_function<std::string>(flag, [&, ptr](const std::string& v) { ov.set(ptr, v); }, help);
  };
  auto list = [&](CLI::App* s, const std::string& flag, const std::string& ptr, const std::string& help, bool numeric) {
    s->add_option_function<std::string>(
        flag,
        [&, flag, ptr, numeric](const std::string& v) {
          json arr = json::array();
          for (const auto& item : split_list(v)) arr.push_back(numeric ? parse_number(flag, item) : json(item));
          ov.set(ptr, arr);
        },
        help);
  };
  auto hyper = [&](CLI::App* s) {
    number(s, "--gamma", "/simulation/hyper/gamma", "EXP4 exploration rate");
    number(s, "--lambda", "/simulation/hyper/lambda", "MetaCMAB ridge");
    number(s, "--alpha", "/simulation/hyper/alpha", "MetaCMAB optimism");
    text(s, "--exploration", "/simulation/hyper/exploration", "optimism or none");
    number(s, "--penalty-scale", "/simulation/hyper/penalty_scale", "ExpertiseTree penalty scale");
    number(s, "--penalty", "/simulation/hyper/penalty", "fixed ExpertiseTree penalty (inf = never split)");
  };

  auto* simulate = app.add_subcommand("simulate", "run a bootstrap campaign and write metrics.csv");
  common(simulate);
  data(simulate);
  hyper(simulate);
  list(simulate, "--sizes", "/simulation/sizes", "group sizes, e.g. 2,4,6", true);
  number(simulate, "--replicas", "/simulation/replicas", "replicas per treatment and size");
  list(simulate, "--treatments", "/simulation/treatments", "treatments to use (default all)", true);
  list(simulate, "--algorithms", "/simulation/algorithms", "random,mv,cwmv,exp4,metacmab,etree", false);
  text(simulate, "--mode", "/simulation/mode", "label or headline");
  number(simulate, "--arms", "/simulation/arms", "headlines per round in headline mode");
  number(simulate, "--horizon", "/simulation/horizon", "rounds per replica");
  text(simulate, "--member-score", "/simulation/member_score", "binary or continuous member ranking");
  number(simulate, "--resamples", "/simulation/bootstrap/resamples", "bootstrap resamples");
  number(simulate, "--sample-size", "/simulation/bootstrap/sample_size", "bootstrap resample size");
  number(simulate, "--curve-resamples", "/simulation/curve_resamples", "resamples for per-round metrics");
  simulate->add_flag_function("--keep-traces", [&](std::int64_t) { ov.set("/simulation/keep_traces", true); },
                              "write per-replica traces");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  common(synth_cmd);
  text(synth_cmd, "--preset", "/synth/preset", "homogeneous, heterogeneous or ethnicity_specialists");
  number(synth_cmd, "--experts", "/synth/experts_per_treatment", "participants per treatment");
  number(synth_cmd, "--accuracy", "/synth/accuracy", "target mean accuracy");
  number(synth_cmd, "--correlation", "/synth/correlation", "target mean pairwise correlation");
  number(synth_cmd, "--rho", "/synth/rho", "latent correlation (used when not calibrating)");
  synth_cmd->add_flag_function("--no-calibrate",
                               [&](std::int64_t) {
                                 ov.set("/synth/accuracy", nullptr);
                                 ov.set("/synth/correlation", nullptr);
                               },
                               "use preset competences as given");

  std::string which = "all";
  auto* analyze = app.add_subcommand("analyze", "bias analyses");
  analyze->add_option("analysis", which, "framing, groupbias, demographics, calibration, timing, diversity or all");
  common(analyze);
  data(analyze);
  hyper(analyze);
  text(analyze, "--source", "/analyze/source", "raw or an algorithm whose predictions are analysed");
  number(analyze, "--group-size", "/analyze/group_size", "group size for prediction sources");
  number(analyze, "--replicas", "/analyze/replicas", "replicas per treatment for prediction sources");
  number(analyze, "--window", "/analyze/window", "moving-average window for timing");
  number(analyze, "--alpha-level", "/analyze/alpha", "significance level");
  text(analyze, "--adjustment", "/analyze/adjustment", "holm, bonferroni or none");
  text(analyze, "--working-correlation", "/analyze/correlation", "exchangeable or independence");
  number(analyze, "--diversity-group-size", "/analyze/diversity_group_size", "group size for the diversity comparison");
  number(analyze, "--diversity-groups", "/analyze/diversity_groups", "groups per treatment for the diversity comparison");

  std::string test;
  auto* stats_cmd = app.add_subcommand("stats", "statistical tests over CSV columns");
  stats_cmd->add_option("test", test, "wilcoxon, mannwhitney, kruskal, dunn, gee or bootstrap")->required();
  common(stats_cmd);
  text(stats_cmd, "--input", "/stats/input", "input CSV");
  list(stats_cmd, "--columns", "/stats/columns", "columns (paired, or one sample per column)", false);
  text(stats_cmd, "--value", "/stats/value", "value column (long format)");
  text(stats_cmd, "--group", "/stats/group", "group column (long format)");
  list(stats_cmd, "--predictors", "/stats/predictors", "GEE predictor columns", false);
  text(stats_cmd, "--cluster", "/stats/cluster", "GEE cluster column");
  text(stats_cmd, "--working-correlation", "/stats/correlation", "exchangeable or independence");
  text(stats_cmd, "--method", "/stats/method", "auto, exact or normal");
  text(stats_cmd, "--adjustment", "/stats/adjustment", "holm, bonferroni or none");
  number(stats_cmd, "--resamples", "/stats/resamples", "bootstrap resamples");
  number(stats_cmd, "--sample-size", "/stats/sample_size", "bootstrap resample size");
  number(stats_cmd, "--level", "/stats/level", "confidence level");

  auto* report = app.add_subcommand("report", "render markdown tables and SVG charts from earlier outputs");
  common(report);
  text(report, "--input", "/report/input_dir", "directory holding metrics.csv etc. (default: output dir)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {  // raised from option callbacks
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    const json cfg = ov.resolve();
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (synth_cmd->parsed()) return cmd_synth(cfg, out);
    if (analyze->parsed()) return cmd_analyze(cfg, which, out);
    if (stats_cmd->parsed()) return cmd_stats(cfg, test, out);
    if (report->parsed()) return cmd_report(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateSampleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: bad config: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace cdm::cli
