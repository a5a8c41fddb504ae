#include "greenmetrics/cli.hpp"

#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using greenmetrics::cli::run;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Invocation result;
  result.code = run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

const char* kT5Scenario =
    R"({"label": "t5-base", "runtime": {"minutes": 1.75}, "epochs": 5,
        "profile_ref": "paper-rig", "facility_ref": "paper-iowa"})";

}  // namespace

TEST_CASE("estimate emits a structured footprint with the golden totals") {
  testutil::TempDir dir;
  const auto scenario = dir.write("t5.json", kT5Scenario);

  const auto r = invoke({"estimate", "--scenario", scenario.string()});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("\"total_wh\": 11.90") != std::string::npos);
  CHECK(r.out.find("\"grams_co2e_per_epoch\": 3.49") != std::string::npos);
  CHECK(r.out.find("\"location_id\": \"paper-iowa\"") != std::string::npos);
}

TEST_CASE("estimate without a scenario is a usage error") {
  const auto r = invoke({"estimate"});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("error:") == 0);
  CHECK(r.err.find("--scenario") != std::string::npos);
}

TEST_CASE("unknown flags are rejected") {
  const auto r = invoke({"estimate", "--scenari", "x.json"});
  CHECK(r.code == 1);
}

TEST_CASE("a subcommand is required") {
  const auto r = invoke({});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") == 0);
}

TEST_CASE("help exits 0 on the app and every subcommand, listing all flags") {
  const auto top = invoke({"--help"});
  CHECK(top.code == 0);
  for (const char* name : {"estimate", "sweep", "telemetry", "score", "report"})
    CHECK(top.out.find(name) != std::string::npos);

  const auto est = invoke({"estimate", "--help"});
  CHECK(est.code == 0);
  for (const char* flag :
       {"--scenario", "--registry", "--profile", "--facility", "--epochs", "--format", "--out"})
    CHECK(est.out.find(flag) != std::string::npos);

  const auto swp = invoke({"sweep", "--help"});
  CHECK(swp.code == 0);
  CHECK(swp.out.find("--locations") != std::string::npos);

  const auto tel = invoke({"telemetry", "--help"});
  CHECK(tel.code == 0);
  CHECK(tel.out.find("--trace") != std::string::npos);

  const auto sco = invoke({"score", "--help"});
  CHECK(sco.code == 0);
  CHECK(sco.out.find("--pairs") != std::string::npos);
  CHECK(sco.out.find("--embeddings") != std::string::npos);

  const auto rep = invoke({"report", "--help"});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("--pairs") != std::string::npos);
}

TEST_CASE("telemetry surfaces parse errors with exit 2") {
  testutil::TempDir dir;
  const auto trace = dir.write("bad.csv",
                               "t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb\n"
                               "10,1,1,0,0\n"
                               "5,1,1,0,0\n");
  const auto r = invoke({"telemetry", "--trace", trace.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error: ") == 0);
  CHECK(r.err.find("non-monotone timestamp at row 3") != std::string::npos);
  // the diagnostic is a single line
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("telemetry computes a footprint when profile and facility are given") {
  testutil::TempDir dir;
  const auto trace = dir.write("t.csv",
                               "t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb\n"
                               "0,1,1,10,40\n"
                               "105,1,1,10,40\n");
  const auto summary_only = invoke({"telemetry", "--trace", trace.string()});
  CHECK(summary_only.code == 0);
  CHECK(summary_only.out.find("\"footprint\"") == std::string::npos);

  const auto full = invoke({"telemetry", "--trace", trace.string(), "--profile", "paper-rig",
                            "--facility", "paper-iowa"});
  CHECK(full.code == 0);
  CHECK(full.out.find("\"footprint\"") != std::string::npos);
  CHECK(full.out.find("\"total_wh\": 11.90") != std::string::npos);

  // profile without facility is a usage error
  const auto half = invoke({"telemetry", "--trace", trace.string(), "--profile", "paper-rig"});
  CHECK(half.code == 1);
}

TEST_CASE("unknown profile name is a validation error with exit 3") {
  testutil::TempDir dir;
  const auto scenario = dir.write("t5.json", kT5Scenario);
  const auto r =
      invoke({"estimate", "--scenario", scenario.string(), "--profile", "no-such-rig"});
  CHECK(r.code == 3);
  CHECK(r.err.find("error: ") == 0);
  CHECK(r.err.find("no-such-rig") != std::string::npos);
}

TEST_CASE("sweep accepts comma-separated bundled facility ids") {
  testutil::TempDir dir;
  const auto scenario = dir.write("llama.json",
                                  R"({"label": "llama-3-8b", "runtime": {"minutes": 22},
                                      "profile_ref": "paper-rig"})");
  const auto r = invoke({"sweep", "--scenario", scenario.string(), "--locations",
                         "paper-iowa,global-average", "--format", "delimited"});
  CHECK(r.code == 0);
  CHECK(r.out.find("facility,ci_g_per_kwh,pue,total_wh,grams_per_epoch,grams_total\n") == 0);
  CHECK(r.out.find("paper-iowa") != std::string::npos);
  CHECK(r.out.find("global-average") != std::string::npos);
  CHECK(r.out.find("43.98") != std::string::npos);
}

TEST_CASE("sweep accepts a locations JSON file with inline facilities") {
  testutil::TempDir dir;
  const auto scenario = dir.write("llama.json",
                                  R"({"label": "llama-3-8b", "runtime": {"minutes": 22},
                                      "profile_ref": "paper-rig"})");
  const auto locations = dir.write("loc.json",
                                   R"(["paper-iowa",
                                       {"location_id": "ci-475", "carbon_intensity_g_per_kwh": 475,
                                        "pue": 1.10}])");
  const auto r = invoke({"sweep", "--scenario", scenario.string(), "--locations",
                         locations.string(), "--format", "delimited"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ci-475") != std::string::npos);
  CHECK(r.out.find("71.10") != std::string::npos);
}

TEST_CASE("score reports per-pair and corpus rows") {
  testutil::TempDir dir;
  const auto pairs = dir.write("p.tsv", "the cat sat\tthe cat ran\nsame text\tsame text\n");
  const auto r = invoke({"score", "--pairs", pairs.string(), "--format", "delimited"});
  CHECK(r.code == 0);
  CHECK(r.out.find("index,rouge1,rouge2,rougeL,meteor,bertscore\n") == 0);
  CHECK(r.out.find("corpus") != std::string::npos);
  // rouge1 mean of 2/3 and 1 -> 83.33 on the displayed scale
  CHECK(r.out.find("83.33") != std::string::npos);
}

TEST_CASE("score attaches bertscore from an embeddings directory") {
  testutil::TempDir dir;
  const auto pairs = dir.write("p.tsv", "a b\ta b\n");
  dir.write("1.cand.emb", "2 2\na 1 0\nb 0 1\n");
  dir.write("1.ref.emb", "2 2\na 1 0\nb 0 1\n");
  const auto r = invoke({"score", "--pairs", pairs.string(), "--embeddings",
                         dir.path().string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"bertscore\"") != std::string::npos);

  const auto without = invoke({"score", "--pairs", pairs.string()});
  CHECK(without.code == 0);
  CHECK(without.out.find("\"bertscore\"") == std::string::npos);
}

TEST_CASE("report joins scenarios with pair files") {
  testutil::TempDir dir;
  const auto t5 = dir.write("t5.json", kT5Scenario);
  const auto bart = dir.write("bart.json",
                              R"({"label": "bart-base", "runtime": {"minutes": 1.2}, "epochs": 5,
                                  "profile_ref": "paper-rig", "facility_ref": "paper-iowa"})");
  const auto t5_pairs = dir.write("t5.tsv", "the cat sat\tthe cat ran\n");
  const auto bart_pairs = dir.write("bart.tsv", "a b c\ta b c\n");

  const auto r = invoke({"report", "--scenario", t5.string(), "--scenario", bart.string(),
                         "--pairs", t5_pairs.string(), "--pairs", bart_pairs.string(),
                         "--format", "delimited"});
  CHECK(r.code == 0);
  // lexicographic record order: bart-base before t5-base
  const auto bart_pos = r.out.find("bart-base");
  const auto t5_pos = r.out.find("t5-base");
  CHECK(bart_pos != std::string::npos);
  CHECK(t5_pos != std::string::npos);
  CHECK(bart_pos < t5_pos);

  // mismatched file counts are a usage error
  const auto bad = invoke({"report", "--scenario", t5.string(), "--pairs",
                           t5_pairs.string(), "--pairs", bart_pairs.string()});
  CHECK(bad.code == 1);
}

TEST_CASE("report renders per-model sweep tables when locations are given") {
  testutil::TempDir dir;
  const auto t5 = dir.write("t5.json", kT5Scenario);
  const auto pairs = dir.write("t5.tsv", "the cat sat\tthe cat ran\n");
  const auto r = invoke({"report", "--scenario", t5.string(), "--pairs", pairs.string(),
                         "--locations", "paper-iowa,global-average"});
  CHECK(r.code == 0);
  CHECK(r.out.find("sweep t5-base") != std::string::npos);
  CHECK(r.out.find("global-average") != std::string::npos);
}

TEST_CASE("--epochs overrides the scenario epoch count") {
  testutil::TempDir dir;
  const auto scenario = dir.write("t5.json", kT5Scenario);
  const auto r =
      invoke({"estimate", "--scenario", scenario.string(), "--epochs", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"epochs\": 1") != std::string::npos);

  const auto bad = invoke({"estimate", "--scenario", scenario.string(), "--epochs", "0"});
  CHECK(bad.code == 1);
}

TEST_CASE("every subcommand produces byte-identical output when rerun") {
  testutil::TempDir dir;
  const auto scenario = dir.write("t5.json", kT5Scenario);
  const auto trace = dir.write("t.csv",
                               "t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb\n"
                               "0,0.8,0.9,10,40\n"
                               "60,0.6,0.7,12,44\n"
                               "120,0.7,1.0,11,42\n");
  const auto pairs = dir.write("p.tsv", "the cat sat\tthe cat ran\n");

  const std::vector<std::vector<std::string>> invocations = {
      {"estimate", "--scenario", scenario.string()},
      {"estimate", "--scenario", scenario.string(), "--format", "plain-table"},
      {"sweep", "--scenario", scenario.string(), "--locations", "paper-iowa,global-average"},
      {"telemetry", "--trace", trace.string(), "--profile", "paper-rig", "--facility",
       "paper-iowa"},
      {"score", "--pairs", pairs.string()},
      {"report", "--scenario", scenario.string(), "--pairs", pairs.string()},
  };
  for (const auto& args : invocations) {
    const auto first = invoke(args);
    const auto second = invoke(args);
    CHECK(first.code == 0);
    CHECK(first.out == second.out);
    CHECK_FALSE(first.out.empty());
  }
}

TEST_CASE("--out writes the file and keeps stdout quiet") {
  testutil::TempDir dir;
  const auto scenario = dir.write("t5.json", kT5Scenario);
  const auto out_path = dir.path() / "result.json";

  const auto r = invoke({"estimate", "--scenario", scenario.string(), "--out",
                         out_path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  REQUIRE(std::filesystem::exists(out_path));
  std::ifstream in(out_path);
  std::ostringstream content;
  content << in.rdbuf();
  CHECK(content.str().find("\"total_wh\"") != std::string::npos);
}

TEST_CASE("registry flag merges user entries for the run") {
  testutil::TempDir dir;
  const auto registry = dir.write("reg.json",
                                  R"({"facilities": {"paper-iowa":
                                      {"carbon_intensity_g_per_kwh": 475, "pue": 1.10}}})");
  const auto scenario = dir.write("t5.json", kT5Scenario);
  const auto r = invoke({"estimate", "--scenario", scenario.string(), "--registry",
                         registry.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"carbon_intensity_g_per_kwh\": 475") != std::string::npos);
}

TEST_CASE("scenario parse failures use exit 2") {
  testutil::TempDir dir;
  const auto bad = dir.write("bad.json", "{not json");
  const auto r = invoke({"estimate", "--scenario", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error: ") == 0);
}
