#include <gtest/gtest.h>

#include <sys/wait.h>

#include <set>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

using namespace cdm;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream o, e;
  Outcome r;
  r.code = cli::run(std::move(args), o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

bool exists(const std::string& path) { return std::filesystem::exists(path); }

}  // namespace

TEST(Cli, HelpAndParseErrors) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({"simulate", "--help"}).code, 0);
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"bogus"}).code, 1);
  EXPECT_EQ(invoke({"simulate", "--fixture", "--no-such-flag"}).code, 1);
  const auto r = invoke({"simulate", "--fixture", "--replicas", "ten"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--replicas"), std::string::npos);
}

TEST(Cli, SimulateWritesMetricsAndSidecars) {
  fixtures::TempDir dir("sim");
  const auto r = invoke({"simulate", "--fixture", "--sizes", "2,4", "--replicas", "10", "--algorithms", "cwmv,exp4",
                      "--seed", "7", "--out", dir.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const csv::Table t = csv::Table::from_file(dir / "metrics.csv");
  std::set<std::pair<std::string, std::string>> cells;
  std::size_t accuracy_rows = 0;
  for (const auto& row : t.rows()) {
    cells.insert({row.fields[t.column("algorithm")], row.fields[t.column("N")]});
    accuracy_rows += row.fields[t.column("metric")] == "accuracy";
  }
  EXPECT_EQ(cells.size(), 4u);
  EXPECT_EQ(accuracy_rows, 4u);

  const json meta = read_json(dir / "metrics.csv.meta.json");
  const json eff = read_json(dir / "effective_config.json");
  const json info = read_json(dir / "run_info.json");
  EXPECT_EQ(meta["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(meta["config_hash"], info["config_hash"]);
  EXPECT_EQ(eff["seed"], 7);
  EXPECT_EQ(eff["simulation"]["replicas"], 10);
  EXPECT_EQ(meta["command"], "simulate");
}

TEST(Cli, RerunIsByteIdenticalAndIgnoresWorkers) {
  fixtures::TempDir a("rerun_a"), b("rerun_b");
  const std::vector<std::string> base = {"simulate", "--fixture", "--sizes", "2,6", "--replicas", "15",
                                         "--algorithms", "random,metacmab,etree", "--seed", "3"};
  auto with = [&](const fixtures::TempDir& d, const std::string& workers) {
    auto args = base;
    args.insert(args.end(), {"--out", d.path.string(), "--workers", workers});
    return invoke(args).code;
  };
  ASSERT_EQ(with(a, "1"), 0);
  ASSERT_EQ(with(b, "4"), 0);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  const json ma = read_json(a / "metrics.csv.meta.json"), mb = read_json(b / "metrics.csv.meta.json");
  EXPECT_EQ(ma, mb);

  // analyses too
  ASSERT_EQ(invoke({"analyze", "framing", "--fixture", "--out", a.path.string()}).code, 0);
  ASSERT_EQ(invoke({"analyze", "framing", "--fixture", "--out", b.path.string()}).code, 0);
  EXPECT_EQ(slurp(a / "framing.csv"), slurp(b / "framing.csv"));
}

TEST(Cli, OversizeGroupIsAValidationError) {
  fixtures::TempDir dir("oversize");
  const auto r = invoke({"simulate", "--fixture", "--sizes", "60", "--replicas", "2", "--out", dir.path.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("group size 60 exceeds the 40 participants"), std::string::npos) << r.err;
  EXPECT_FALSE(exists(dir / "metrics.csv"));
}

TEST(Cli, ReportNeedsPriorOutputs) {
  fixtures::TempDir dir("report_empty");
  const auto r = invoke({"report", "--out", dir.path.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing prerequisite output"), std::string::npos) << r.err;
}

TEST(Cli, ReportRendersFromMetrics) {
  fixtures::TempDir dir("report");
  ASSERT_EQ(invoke({"simulate", "--fixture", "--sizes", "2,4", "--replicas", "5", "--algorithms", "cwmv,etree", "--out",
                 dir.path.string()})
                .code,
            0);
  ASSERT_EQ(invoke({"analyze", "framing", "--fixture", "--out", dir.path.string()}).code, 0);
  const auto r = invoke({"report", "--out", dir.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string md = slurp(dir / "report.md");
  EXPECT_NE(md.find("cwmv"), std::string::npos);
  std::size_t svgs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path))
    if (e.path().extension() == ".svg") {
      ++svgs;
      EXPECT_EQ(slurp(e.path().string()).rfind("<svg", 0), 0u) << e.path();
    }
  EXPECT_GE(svgs, 3u);
}

TEST(Cli, ConfigFileWithFlagOverrides) {
  fixtures::TempDir dir("config");
  fixtures::write_text(dir / "run.json", R"({"seed": 5, "simulation": {"sizes": [2], "replicas": 3,
                                             "algorithms": ["cwmv", {"name": "exp4", "label": "exp4_hot", "gamma": 0.9}]}})");
  const auto r = invoke({"simulate", "--fixture", "--config", dir / "run.json", "--seed", "11", "--out", dir.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json eff = read_json(dir / "effective_config.json");
  EXPECT_EQ(eff["seed"], 11);
  EXPECT_EQ(eff["simulation"]["replicas"], 3);
  const std::string m = slurp(dir / "metrics.csv");
  EXPECT_NE(m.find("exp4_hot"), std::string::npos);

  fixtures::write_text(dir / "bad.json", R"({"simulation": {"replicaz": 3}})");
  const auto bad = invoke({"simulate", "--fixture", "--config", dir / "bad.json", "--out", dir.path.string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("replicaz"), std::string::npos);

  fixtures::write_text(dir / "broken.json", "{ not json");
  EXPECT_EQ(invoke({"simulate", "--fixture", "--config", dir / "broken.json", "--out", dir.path.string()}).code, 1);
  fixtures::write_text(dir / "gamma.json", R"({"simulation": {"hyper": {"gamma": 3}}})");
  EXPECT_EQ(invoke({"simulate", "--fixture", "--config", dir / "gamma.json", "--out", dir.path.string()}).code, 1);
}

TEST(Cli, SynthRoundTripsThroughSimulate) {
  fixtures::TempDir dir("synth");
  ASSERT_EQ(invoke({"synth", "--preset", "homogeneous", "--no-calibrate", "--seed", "3", "--out", dir.path.string()}).code,
            0);
  const Dataset loaded = load_dataset(dir / "headlines.csv", dir / "responses.csv");
  const Dataset direct = synth::generate(synth::homogeneous_preset(3)).dataset;
  EXPECT_EQ(loaded.responses(), direct.responses());
  EXPECT_EQ(loaded.headlines(), direct.headlines());
  EXPECT_TRUE(exists(dir / "responses.csv.meta.json"));

  const auto r = invoke({"simulate", "--headlines", dir / "headlines.csv", "--responses", dir / "responses.csv",
                      "--sizes", "3", "--replicas", "2", "--algorithms", "mv", "--out", dir.path.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const json meta = read_json(dir / "metrics.csv.meta.json");
  EXPECT_TRUE(meta.contains("data"));
}

TEST(Cli, AnalyzeAllOnFixture) {
  fixtures::TempDir dir("analyze");
  const auto r = invoke({"analyze", "all", "--fixture", "--out", dir.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"framing.csv", "group_errors.csv", "group_tests.csv", "gee_errors.csv", "demographics.csv",
                        "calibration.csv", "timing.csv", "diversity.csv"}) {
    EXPECT_TRUE(exists(dir / f)) << f;
    EXPECT_TRUE(exists(dir / (std::string(f) + ".meta.json"))) << f;
  }
  EXPECT_EQ(csv::Table::from_file(dir / "framing.csv").rows().size(), 120u);
  EXPECT_EQ(invoke({"analyze", "nonsense", "--fixture", "--out", dir.path.string()}).code, 1);
}

TEST(Cli, StatsOverCsvColumns) {
  fixtures::TempDir dir("stats");
  fixtures::write_text(dir / "paired.csv",
                       "a,b\n1.83,0.878\n0.50,0.647\n1.62,0.598\n2.48,2.05\n1.68,1.06\n1.88,1.29\n1.55,1.06\n3.06,3.14\n");
  ASSERT_EQ(invoke({"stats", "wilcoxon", "--input", dir / "paired.csv", "--columns", "a,b", "--out", dir.path.string()}).code,
            0);
  const csv::Table t = csv::Table::from_file(dir / "stats_wilcoxon.csv");
  ASSERT_EQ(t.rows().size(), 1u);
  EXPECT_NEAR(std::stod(t.rows()[0].fields[t.column("p_value")]), 0.0390625, 1e-9);

  fixtures::write_text(dir / "same.csv", "a,b\n1,1\n2,2\n3,3\n4,4\n5,5\n");
  const auto deg = invoke({"stats", "wilcoxon", "--input", dir / "same.csv", "--columns", "a,b", "--out", dir.path.string()});
  EXPECT_EQ(deg.code, 1);
  EXPECT_NE(deg.err.find("degenerate"), std::string::npos);

  fixtures::write_text(dir / "long.csv", "g,v\nx,1\nx,2\nx,3\ny,7\ny,8\ny,9\nz,4\nz,5\nz,6\n");
  ASSERT_EQ(invoke({"stats", "kruskal", "--input", dir / "long.csv", "--value", "v", "--group", "g", "--out",
                 dir.path.string()})
                .code,
            0);
  EXPECT_TRUE(exists(dir / "stats_kruskal.csv"));
  EXPECT_EQ(invoke({"stats", "nope", "--input", dir / "long.csv", "--out", dir.path.string()}).code, 1);
  EXPECT_EQ(invoke({"stats", "kruskal", "--input", dir / "missing.csv", "--value", "v", "--group", "g", "--out",
                 dir.path.string()})
                .code,
            1);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  fixtures::TempDir dir("runtime");
  fixtures::write_text(dir / "plain", "x");
  const auto r = invoke({"simulate", "--fixture", "--sizes", "2", "--replicas", "2", "--out", dir / "plain/below"});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, BinaryExitCodes) {
  auto status = [](const std::string& args) {
    const int s = std::system((std::string(CDM_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("bogus"), 1);
  fixtures::TempDir dir("binary");
  EXPECT_EQ(status("simulate --fixture --sizes 2 --replicas 2 --algorithms cwmv --out " + dir.path.string()), 0);
  EXPECT_TRUE(exists(dir / "metrics.csv"));
}
