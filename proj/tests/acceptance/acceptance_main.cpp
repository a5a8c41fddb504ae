// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Runs on a single core in well under a minute.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "greenmetrics/cli.hpp"
#include "greenmetrics/errors.hpp"
#include "greenmetrics/estimator.hpp"
#include "greenmetrics/metrics.hpp"
#include "greenmetrics/registry.hpp"
#include "greenmetrics/report.hpp"
#include "greenmetrics/telemetry.hpp"
#include "json.hpp"

using namespace greenmetrics;

namespace {

struct CriterionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CriterionFailure(message);
}

void require_close(double got, double want, double rel_tol, const std::string& what) {
  const double denom = std::abs(want) > 0 ? std::abs(want) : 1.0;
  if (std::abs(got - want) / denom > rel_tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: got %.10g, want %.10g (rel tol %g)", what.c_str(),
                  got, want, rel_tol);
    throw CriterionFailure(buf);
  }
}

RunSpec run_of(double minutes, int epochs = 1) {
  RunSpec run;
  run.label = "acceptance";
  run.runtime_hours = minutes / 60.0;
  run.epochs = epochs;
  return run;
}

struct Rig {
  HardwareProfile hw;
  FacilityProfile iowa;
};

Rig rig() {
  const Registry reg = Registry::bundled();
  return {reg.lookup_profile("paper-rig"), reg.lookup_facility("paper-iowa")};
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("greenmetrics-acceptance-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string write(const std::string& name, const std::string& content) const {
    const auto file = path_ / name;
    std::ofstream out(file, std::ios::binary);
    out << content;
    return file.string();
  }

 private:
  std::filesystem::path path_;
};

// ---- criteria ------------------------------------------------------------

const std::array<std::array<double, 3>, 3> kGoldens = {{
    // minutes, Wh, grams
    {{1.75, 11.91, 3.5}},
    {{1.2, 8.16, 2.4}},
    {{22.0, 149.68, 43.98}},
}};

void golden_energy() {
  const Rig r = rig();
  for (const auto& [minutes, wh, grams] : kGoldens) {
    const FootprintResult res = estimate(run_of(minutes), r.hw, r.iowa);
    require_close(res.energy.total_wh, wh, 0.005,
                  "energy at " + std::to_string(minutes) + " min");
  }

  // Same reading through the full CLI path.
  TempDir dir;
  const auto scenario = dir.write("t5.json",
                                  R"({"label": "t5-base", "runtime": {"minutes": 1.75},
                                      "profile_ref": "paper-rig",
                                      "facility_ref": "paper-iowa"})");
  std::ostringstream out, err;
  const int code = cli::run({"estimate", "--scenario", scenario}, out, err);
  require(code == 0, "cli estimate failed: " + err.str());
  const auto doc = nlohmann::json::parse(out.str());
  require_close(doc.at("energy_per_epoch").at("total_wh").get<double>(), 11.91, 0.005,
                "cli-reported energy");
}

void golden_carbon() {
  const Rig r = rig();
  for (const auto& [minutes, wh, grams] : kGoldens) {
    const FootprintResult res = estimate(run_of(minutes), r.hw, r.iowa);
    require_close(res.grams_co2e_per_epoch, grams, 0.005,
                  "carbon at " + std::to_string(minutes) + " min");
  }
}

void share_reproduction() {
  const Rig r = rig();
  const FootprintResult base = estimate(run_of(22.0), r.hw, r.iowa);
  require(base.energy.shares_defined, "shares must be defined");
  require(std::abs(base.energy.share_gpu * 100.0 - 67.4) <= 0.15,
          "gpu share off by more than 0.15 points");
  require(std::abs(base.energy.share_cpu * 100.0 - 24.3) <= 0.15,
          "cpu share off by more than 0.15 points");
  require(std::abs(base.energy.share_memory * 100.0 - 8.3) <= 0.15,
          "memory share off by more than 0.15 points");

  std::mt19937 rng(101);
  std::uniform_real_distribution<double> tdist(0.001, 200.0);
  std::uniform_real_distribution<double> pdist(1.0, 3.0);
  std::uniform_real_distribution<double> cdist(1.0, 1000.0);
  for (int trial = 0; trial < 120; ++trial) {
    RunSpec run = run_of(1.0);
    run.runtime_hours = tdist(rng);
    FacilityProfile fac{"perturbed", cdist(rng), pdist(rng)};
    const FootprintResult res = estimate(run, r.hw, fac);
    require(std::abs(res.energy.share_gpu - base.energy.share_gpu) <= 1e-12 &&
                std::abs(res.energy.share_cpu - base.energy.share_cpu) <= 1e-12 &&
                std::abs(res.energy.share_memory - base.energy.share_memory) <= 1e-12,
            "shares moved under t/PUE/CI perturbation");
  }
}

void flight_equivalence() {
  const auto routes = bundled_flight_routes();
  require(routes.size() == 2, "expected two bundled routes");
  const Equivalence paris = flight_equivalent(43.98, routes[0]);
  require(format_percent(paris.fraction) == "0.09%",
          "paris-london rendered " + format_percent(paris.fraction) + ", want 0.09%");
  const Equivalence kolkata = flight_equivalent(43.98, routes[1]);
  require(format_percent(kolkata.fraction) == "0.02%",
          "kolkata-dehradun rendered " + format_percent(kolkata.fraction) + ", want 0.02%");
}

void global_average_sweep() {
  const Rig r = rig();
  const RunSpec llama = run_of(22.0);
  const FacilityProfile ci475{"ci-475", 475.0, 1.10};
  const auto swept = sweep_locations(llama, r.hw, {r.iowa, ci475});
  require_close(swept[1].second.grams_co2e_per_epoch, 71.10, 0.005, "grams at CI 475");

  std::mt19937 rng(202);
  std::uniform_real_distribution<double> kdist(0.05, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double k = kdist(rng);
    FacilityProfile scaled = ci475;
    scaled.carbon_intensity_g_per_kwh *= k;
    const auto pairres = sweep_locations(llama, r.hw, {ci475, scaled});
    require_close(pairres[1].second.grams_co2e_per_epoch,
                  k * pairres[0].second.grams_co2e_per_epoch, 1e-12,
                  "sweep output not linear in CI");
  }
}

void homogeneous_consistency() {
  std::mt19937 rng(303);
  std::uniform_real_distribution<double> udist(0.0, 1.0);
  std::uniform_real_distribution<double> pdist(0.0, 30.0);
  std::uniform_int_distribution<int> cdist(1, 96);
  for (int trial = 0; trial < 1000; ++trial) {
    HardwareProfile hw;
    hw.cpu = {"c", cdist(rng), pdist(rng)};
    hw.gpu = {"g", pdist(rng) * 30.0};  // power irrelevant with no devices
    hw.gpu_count = 0;
    hw.memory = {pdist(rng) * 20.0, 0.3725};
    RunSpec run = run_of(1.0);
    run.runtime_hours = udist(rng) * 100.0;
    run.u_cpu = udist(rng);
    run.u_gpu = udist(rng);
    const FacilityProfile fac{"f", 50.0 + udist(rng) * 900.0, 1.0 + udist(rng)};

    const double via_model = estimate(run, hw, fac).grams_co2e_per_epoch;
    const double direct = run.runtime_hours *
                          (hw.cpu.cores * hw.cpu.power_per_core_w * run.u_cpu +
                           hw.memory.capacity_gb * hw.memory.power_per_gb_w) *
                          fac.pue * fac.carbon_intensity_g_per_kwh * 0.001;
    if (direct > 0)
      require(std::abs(via_model - direct) / direct <= 1e-12,
              "homogeneous-core path deviates from the direct evaluation");
    else
      require(via_model == 0.0, "zero direct evaluation must give zero grams");
  }
}

void telemetry_correction() {
  const Rig r = rig();
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> udist(0.0, 1.0);
  std::uniform_real_distribution<double> dtdist(0.25, 30.0);

  for (int trial = 0; trial < 500; ++trial) {
    TelemetryTrace trace;
    trace.source_label = "synthetic";
    const bool constant_full = trial % 5 == 0;  // 100 of 500 are constant-1.0
    double t = udist(rng) * 50.0;
    const int samples = 2 + static_cast<int>(rng() % 40);
    for (int i = 0; i < samples; ++i) {
      const double cpu = constant_full ? 1.0 : udist(rng);
      const double gpu = constant_full ? 1.0 : udist(rng);
      trace.samples.push_back({t, cpu, gpu, udist(rng) * 40.0, udist(rng) * 80.0});
      t += dtdist(rng);
    }

    const FootprintResult eff = effective_estimate(trace, r.hw, r.iowa);
    RunSpec assumed;
    assumed.runtime_hours = trace.duration_seconds() / 3600.0;
    assumed.epochs = 1;
    const FootprintResult full = estimate(assumed, r.hw, r.iowa);

    require(eff.grams_co2e_per_epoch <= full.grams_co2e_per_epoch,
            "measured-usage grams exceeded the 100%-assumption grams");
    if (constant_full)
      require(eff.grams_co2e_per_epoch == full.grams_co2e_per_epoch,
              "constant-1.0 trace must match the 100%-assumption estimate exactly");
  }

  // 50% gpu square wave halves the gpu term.
  TelemetryTrace half, full_trace;
  half.source_label = full_trace.source_label = "wave";
  half.samples = {{0, 1, 1, 0, 0}, {30, 1, 0, 0, 0}, {60, 1, 0, 0, 0}};
  full_trace.samples = {{0, 1, 1, 0, 0}, {30, 1, 1, 0, 0}, {60, 1, 1, 0, 0}};
  const FootprintResult eff_half = effective_estimate(half, r.hw, r.iowa);
  const FootprintResult eff_full = effective_estimate(full_trace, r.hw, r.iowa);
  require_close(eff_half.energy.gpu_wh, eff_full.energy.gpu_wh / 2.0, 1e-9,
                "square wave must halve the gpu energy term");
}

// Enumerates every sequence of length <= max_len over {a, b, c} encoded as a
// string of single-character tokens.
std::vector<std::string> all_sequences(int max_len) {
  std::vector<std::string> out = {""};
  std::vector<std::string> frontier = {""};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& base : frontier)
      for (char c : {'a', 'b', 'c'}) next.push_back(base + c);
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

size_t naive_lcs(const std::string& a, const std::string& b, size_t i, size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + naive_lcs(a, b, i + 1, j + 1);
  return std::max(naive_lcs(a, b, i + 1, j), naive_lcs(a, b, i, j + 1));
}

// Direct multiset counting of clipped n-gram matches, base-3 encoded.
int direct_ngram_matches(const std::string& a, const std::string& b, int n) {
  const int buckets = static_cast<int>(std::pow(3, n));
  std::vector<int> ca(buckets, 0), cb(buckets, 0);
  auto encode = [n](const std::string& s, size_t at) {
    int code = 0;
    for (int k = 0; k < n; ++k) code = code * 3 + (s[at + k] - 'a');
    return code;
  };
  if (a.size() >= static_cast<size_t>(n))
    for (size_t i = 0; i + n <= a.size(); ++i) ++ca[encode(a, i)];
  if (b.size() >= static_cast<size_t>(n))
    for (size_t i = 0; i + n <= b.size(); ++i) ++cb[encode(b, i)];
  int matched = 0;
  for (int g = 0; g < buckets; ++g) matched += std::min(ca[g], cb[g]);
  return matched;
}

TokenSeq to_tokens(const std::string& s) {
  TokenSeq seq;
  seq.tokens.reserve(s.size());
  for (char c : s) seq.tokens.emplace_back(1, c);
  return seq;
}

void metric_oracles() {
  // Exhaustive rouge check over the 3-symbol alphabet.
  const auto sequences = all_sequences(6);
  std::vector<TokenSeq> tokenized;
  tokenized.reserve(sequences.size());
  for (const auto& s : sequences) tokenized.push_back(to_tokens(s));

  for (size_t ia = 0; ia < sequences.size(); ++ia) {
    for (size_t ib = 0; ib < sequences.size(); ++ib) {
      const std::string& a = sequences[ia];
      const std::string& b = sequences[ib];
      const TokenSeq& ta = tokenized[ia];
      const TokenSeq& tb = tokenized[ib];

      for (int n = 1; n <= 2; ++n) {
        const PRF got = rouge_n(ta, tb, n);
        const int na = static_cast<int>(a.size()) - n + 1;
        const int nb = static_cast<int>(b.size()) - n + 1;
        if (na <= 0 || nb <= 0) {
          require(got.precision == 0 && got.recall == 0 && got.f1 == 0,
                  "degenerate rouge_n input must score zero");
          continue;
        }
        const int m = direct_ngram_matches(a, b, n);
        require(std::abs(got.precision - double(m) / na) <= 1e-12 &&
                    std::abs(got.recall - double(m) / nb) <= 1e-12,
                "rouge_n disagrees with direct multiset counting on '" + a + "' vs '" + b +
                    "'");
      }

      const PRF got = rouge_l(ta, tb);
      if (a.empty() || b.empty()) {
        require(got.precision == 0 && got.recall == 0 && got.f1 == 0,
                "empty rouge_l input must score zero");
      } else {
        const double lcs = static_cast<double>(naive_lcs(a, b, 0, 0));
        require(std::abs(got.precision - lcs / a.size()) <= 1e-12 &&
                    std::abs(got.recall - lcs / b.size()) <= 1e-12,
                "rouge_l disagrees with the naive LCS on '" + a + "' vs '" + b + "'");
      }
    }
  }

  // meteor identity law for duplicate-free sequences up to length 10.
  const std::vector<std::string> vocab = {"q", "w", "e", "r", "t",
                                          "y", "u", "i", "o", "p"};
  for (size_t len = 1; len <= 10; ++len) {
    TokenSeq x;
    x.tokens.assign(vocab.begin(), vocab.begin() + len);
    const double expected = 1.0 - 0.5 / (double(len) * len * len);
    require(std::abs(meteor(x, x) - expected) <= 1e-12,
            "meteor identity law failed at length " + std::to_string(len));
  }

  // bertscore identity, orthogonality and the worked two-token example.
  EmbeddingSeq id;
  id.tokens = {"t0", "t1"};
  id.vectors = {{0.6, 0.8}, {1.0, 0.0}};
  const PRF same = bertscore_precomputed(id, id);
  require(same.precision == 1.0 && same.recall == 1.0 && same.f1 == 1.0,
          "bertscore identity must be exactly 1");

  EmbeddingSeq ea, eb;
  ea.tokens = {"t0"};
  ea.vectors = {{1.0, 0.0, 0.0}};
  eb.tokens = {"t0", "t1"};
  eb.vectors = {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  const PRF ortho = bertscore_precomputed(ea, eb);
  require(ortho.precision == 0.0 && ortho.recall == 0.0 && ortho.f1 == 0.0,
          "bertscore on orthogonal vocabularies must be exactly 0");

  EmbeddingSeq cand, ref;
  cand.tokens = ref.tokens = {"t0", "t1"};
  cand.vectors = {{1.0, 0.0}, {0.0, 1.0}};
  const double h = std::sqrt(2.0) / 2.0;
  ref.vectors = {{1.0, 0.0}, {h, h}};
  const PRF worked = bertscore_precomputed(cand, ref);
  require(std::abs(worked.f1 - 0.85355) <= 1e-4,
          "bertscore worked example out of tolerance");

  // The report path accepts externally published corpus scores verbatim and
  // derives efficiency ratios from them.
  MetricScore t5;
  t5.rouge1.f1 = 0.3291;
  t5.rouge2.f1 = 0.1208;
  t5.rougeL.f1 = 0.236;
  t5.meteor = 0.2994;
  const Rig r = rig();
  std::map<std::string, MetricScore> scores{{"t5-base", t5}};
  std::map<std::string, FootprintResult> footprints{
      {"t5-base", estimate(run_of(1.75, 5), r.hw, r.iowa)}};
  const auto records = build_records(scores, footprints);
  const double grams_total = records[0].footprint.grams_co2e_total;
  require_close(grams_total, 17.49, 0.005, "five-epoch grams total");
  require_close(records[0].grams_per_point.at("rouge1"), grams_total / 32.91, 1e-12,
                "grams_per_point from published scores");
}

void cli_determinism() {
  TempDir dir;
  const auto scenario = dir.write("t5.json",
                                  R"({"label": "t5-base", "runtime": {"minutes": 1.75},
                                      "epochs": 5, "profile_ref": "paper-rig",
                                      "facility_ref": "paper-iowa"})");
  const auto trace = dir.write("trace.csv",
                               "t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb\n"
                               "0,0.9,0.95,11,38\n"
                               "30,0.4,0.80,12,41\n"
                               "90,0.7,1.0,12,40\n");
  const auto pairs = dir.write("pairs.tsv",
                               "the cat sat on the mat\tthe cat ran over the mat\n"
                               "a concise highlight\ta concise highlight\n");
  dir.write("1.cand.emb", "2 2\nt0 1 0\nt1 0 1\n");
  dir.write("1.ref.emb", "2 2\nt0 1 0\nt1 0.7071 0.7071\n");
  dir.write("2.cand.emb", "1 2\nt0 1 0\n");
  dir.write("2.ref.emb", "1 2\nt0 1 0\n");

  const std::vector<std::vector<std::string>> invocations = {
      {"estimate", "--scenario", scenario},
      {"estimate", "--scenario", scenario, "--format", "plain-table"},
      {"sweep", "--scenario", scenario, "--locations", "paper-iowa,global-average"},
      {"sweep", "--scenario", scenario, "--locations", "paper-iowa", "--format", "delimited"},
      {"telemetry", "--trace", trace},
      {"telemetry", "--trace", trace, "--profile", "paper-rig", "--facility", "paper-iowa",
       "--format", "plain-table"},
      {"score", "--pairs", pairs},
      {"score", "--pairs", pairs, "--embeddings",
       std::filesystem::path(scenario).parent_path().string(), "--format", "delimited"},
      {"report", "--scenario", scenario, "--pairs", pairs, "--format", "structured"},
      {"report", "--scenario", scenario, "--pairs", pairs, "--format", "plain-table"},
  };

  for (const auto& args : invocations) {
    std::ostringstream out1, err1, out2, err2;
    const int code1 = cli::run(args, out1, err1);
    const int code2 = cli::run(args, out2, err2);
    require(code1 == 0, "subcommand '" + args[0] + "' failed: " + err1.str());
    require(code1 == code2, "exit codes differ across reruns");
    require(std::hash<std::string>{}(out1.str()) == std::hash<std::string>{}(out2.str()) &&
                out1.str() == out2.str(),
            "subcommand '" + args[0] + "' produced different bytes across reruns");
    require(!out1.str().empty(), "subcommand '" + args[0] + "' produced no output");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"1. golden energy reproduction (11.91/8.16/149.68 Wh within 0.5%)", golden_energy},
      {"2. golden carbon reproduction (3.5/2.4/43.98 g within 0.5%)", golden_carbon},
      {"3. share reproduction (67.4/24.3/8.3 within 0.15 points, invariant)", share_reproduction},
      {"4. flight equivalence rendering (0.09% and 0.02%)", flight_equivalence},
      {"5. global-average sweep (71.10 g, linear in CI)", global_average_sweep},
      {"6. homogeneous-core consistency (1000 profiles, 1e-12)", homogeneous_consistency},
      {"7. telemetry correction (500 traces, square wave)", telemetry_correction},
      {"8. metric oracles (exhaustive rouge, meteor law, bertscore)", metric_oracles},
      {"9. CLI determinism (byte-identical reruns)", cli_determinism},
  };

  int failures = 0;
  for (const auto& [name, body] : criteria) {
    try {
      body();
      std::cout << "[PASS] " << name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] " << name << " -- " << e.what() << "\n";
    }
  }
  if (failures > 0) std::cout << failures << " criterion(s) failed\n";
  return failures == 0 ? 0 : 1;
}
