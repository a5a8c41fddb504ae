#include "greenmetrics/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "greenmetrics/errors.hpp"
#include "greenmetrics/estimator.hpp"
#include "greenmetrics/metrics.hpp"
#include "greenmetrics/registry.hpp"
#include "greenmetrics/report.hpp"
#include "greenmetrics/telemetry.hpp"
#include "greenmetrics/version.hpp"
#include "json_io.hpp"
#include "text_table.hpp"

namespace greenmetrics::cli {

namespace {

namespace fs = std::filesystem;
using detail::align_table;
using detail::fmt2;
using nlohmann::json;

Registry open_registry(const std::string& path) {
  return path.empty() ? Registry::bundled() : Registry::load(path);
}

// Results go to stdout unless --out redirects them to a file.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) raise(errc::file_unreadable, "cannot write output file '" + out_path + "'");
  file << text;
}

RenderFormat parse_format(const std::string& name) {
  if (name == "plain-table") return RenderFormat::plain_table;
  if (name == "delimited") return RenderFormat::delimited;
  return RenderFormat::structured;
}

// Applies CLI overrides, resolves the references, and estimates.
struct ResolvedRun {
  RunSpec run;
  HardwareProfile hw;
  FacilityProfile facility;
};

ResolvedRun resolve_run(const std::string& scenario_path, const Registry& reg,
                        const std::string& profile_flag, const std::string& facility_flag,
                        int epochs_flag, bool need_facility = true) {
  RunSpec run = load_run_spec(scenario_path);
  if (!profile_flag.empty()) run.profile_ref = profile_flag;
  if (!facility_flag.empty()) run.facility_ref = facility_flag;
  if (epochs_flag > 0) run.epochs = epochs_flag;
  if (run.profile_ref.empty())
    raise(errc::invariant_violation,
          scenario_path + ": no hardware profile named; set profile_ref or pass --profile");
  if (need_facility && run.facility_ref.empty())
    raise(errc::invariant_violation,
          scenario_path + ": no facility named; set facility_ref or pass --facility");
  ResolvedRun resolved;
  resolved.hw = reg.lookup_profile(run.profile_ref);
  if (need_facility) resolved.facility = reg.lookup_facility(run.facility_ref);
  resolved.run = std::move(run);
  return resolved;
}

// --locations accepts either a JSON file (array of facility ids or inline
// facility objects) or a comma-separated list of registry facility ids.
std::vector<FacilityProfile> resolve_locations(const std::string& arg, const Registry& reg) {
  std::vector<FacilityProfile> facilities;
  std::error_code ec;
  if (fs::exists(fs::path(arg), ec)) {
    std::ifstream in(arg);
    if (!in) raise(errc::file_unreadable, "cannot read locations file '" + arg + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      raise(errc::schema_violation, arg + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) raise(errc::schema_violation, arg + ": top level must be an array");
    for (const auto& item : doc) {
      if (item.is_string()) {
        facilities.push_back(reg.lookup_facility(item.get<std::string>()));
      } else if (item.is_object()) {
        for (const auto& [key, _] : item.items()) {
          if (key != "location_id" && key != "carbon_intensity_g_per_kwh" && key != "pue")
            raise(errc::schema_violation, arg + ": facility entry: unknown key '" + key + "'");
        }
        FacilityProfile fac;
        try {
          fac.location_id = item.at("location_id").get<std::string>();
          fac.carbon_intensity_g_per_kwh = item.at("carbon_intensity_g_per_kwh").get<double>();
          fac.pue = item.at("pue").get<double>();
        } catch (const json::exception& e) {
          raise(errc::schema_violation, arg + ": facility entry: " + e.what());
        }
        if (fac.carbon_intensity_g_per_kwh < 0)
          raise(errc::invariant_violation,
                arg + ": facility '" + fac.location_id + "': carbon intensity must be >= 0");
        if (fac.pue < 1.0)
          raise(errc::invariant_violation,
                arg + ": facility '" + fac.location_id + "': pue must be >= 1.0");
        facilities.push_back(std::move(fac));
      } else {
        raise(errc::schema_violation, arg + ": entries must be ids or facility objects");
      }
    }
  } else {
    std::string::size_type start = 0;
    while (start <= arg.size()) {
      auto comma = arg.find(',', start);
      const std::string id =
          arg.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!id.empty()) facilities.push_back(reg.lookup_facility(id));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (facilities.empty()) raise(errc::empty_facility_list, "no facilities in '" + arg + "'");
  return facilities;
}

json footprint_with_equivalences(const FootprintResult& res) {
  json j = detail::footprint_to_json(res);
  json eqs = json::array();
  for (const auto& route : bundled_flight_routes())
    eqs.push_back(detail::equivalence_to_json(flight_equivalent(res.grams_co2e_total, route)));
  j["equivalences"] = std::move(eqs);
  return j;
}

std::string footprint_plain(const FootprintResult& res) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"run", res.label});
  rows.push_back({"facility", res.facility.location_id});
  rows.push_back({"ci_g_per_kwh", fmt2(res.facility.carbon_intensity_g_per_kwh)});
  rows.push_back({"pue", fmt2(res.facility.pue)});
  rows.push_back({"epochs", std::to_string(res.epochs)});
  rows.push_back({"cpu_wh", fmt2(res.energy.cpu_wh)});
  rows.push_back({"gpu_wh", fmt2(res.energy.gpu_wh)});
  rows.push_back({"memory_wh", fmt2(res.energy.memory_wh)});
  rows.push_back({"total_wh", fmt2(res.energy.total_wh)});
  if (res.energy.shares_defined) {
    rows.push_back({"share_gpu", fmt2(res.energy.share_gpu * 100.0) + "%"});
    rows.push_back({"share_cpu", fmt2(res.energy.share_cpu * 100.0) + "%"});
    rows.push_back({"share_memory", fmt2(res.energy.share_memory * 100.0) + "%"});
  } else {
    rows.push_back({"shares", "undefined (zero energy)"});
  }
  rows.push_back({"grams_per_epoch", fmt2(res.grams_co2e_per_epoch)});
  rows.push_back({"grams_total", fmt2(res.grams_co2e_total)});
  for (const auto& route : bundled_flight_routes()) {
    const auto eq = flight_equivalent(res.grams_co2e_total, route);
    rows.push_back({"flight " + eq.route_label,
                    format_percent(eq.fraction) + " of " + fmt2(eq.distance_km) + " km at " +
                        fmt2(eq.per_km_g) + " g/km"});
  }
  return align_table(rows);
}

struct EstimateArgs {
  std::string scenario, registry, profile, facility, format = "structured", out;
  int epochs = 0;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const Registry reg = open_registry(a.registry);
  const ResolvedRun r = resolve_run(a.scenario, reg, a.profile, a.facility, a.epochs);
  const FootprintResult res = estimate(r.run, r.hw, r.facility);
  std::string text;
  if (parse_format(a.format) == RenderFormat::plain_table)
    text = footprint_plain(res);
  else
    text = footprint_with_equivalences(res).dump(2) + "\n";
  emit(text, a.out, out);
  return 0;
}

struct SweepArgs {
  std::string scenario, registry, profile, facility, locations, format = "plain-table", out;
  int epochs = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const Registry reg = open_registry(a.registry);
  const ResolvedRun r =
      resolve_run(a.scenario, reg, a.profile, a.facility, a.epochs, /*need_facility=*/false);
  const auto facilities = resolve_locations(a.locations, reg);
  const auto results = sweep_locations(r.run, r.hw, facilities);

  std::string text;
  switch (parse_format(a.format)) {
    case RenderFormat::structured: {
      json j;
      j["label"] = r.run.label;
      j["sweep"] = json::array();
      for (const auto& [id, res] : results)
        j["sweep"].push_back({{"facility_id", id}, {"result", detail::footprint_to_json(res)}});
      text = j.dump(2) + "\n";
      break;
    }
    case RenderFormat::delimited: {
      text = "facility,ci_g_per_kwh,pue,total_wh,grams_per_epoch,grams_total\n";
      for (const auto& [id, res] : results) {
        text += id + "," + fmt2(res.facility.carbon_intensity_g_per_kwh) + "," +
                fmt2(res.facility.pue) + "," + fmt2(res.energy.total_wh) + "," +
                fmt2(res.grams_co2e_per_epoch) + "," + fmt2(res.grams_co2e_total) + "\n";
      }
      break;
    }
    case RenderFormat::plain_table: {
      std::vector<std::vector<std::string>> rows;
      rows.push_back({"facility", "ci_g_per_kwh", "pue", "total_wh", "grams_per_epoch",
                      "grams_total"});
      for (const auto& [id, res] : results)
        rows.push_back({id, fmt2(res.facility.carbon_intensity_g_per_kwh),
                        fmt2(res.facility.pue), fmt2(res.energy.total_wh),
                        fmt2(res.grams_co2e_per_epoch), fmt2(res.grams_co2e_total)});
      text = "sweep " + r.run.label + "\n" + align_table(rows);
      break;
    }
  }
  emit(text, a.out, out);
  return 0;
}

struct TelemetryArgs {
  std::string trace, registry, profile, facility, format = "structured", out;
};

int cmd_telemetry(const TelemetryArgs& a, std::ostream& out) {
  const TelemetryTrace trace = parse_trace(fs::path(a.trace));
  const UtilizationSummary summary = summarize(trace);

  std::optional<FootprintResult> footprint;
  if (!a.profile.empty()) {
    const Registry reg = open_registry(a.registry);
    footprint = effective_estimate(trace, reg.lookup_profile(a.profile),
                                   reg.lookup_facility(a.facility));
  }

  std::string text;
  if (parse_format(a.format) == RenderFormat::plain_table) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"trace", trace.source_label});
    rows.push_back({"samples", std::to_string(trace.samples.size())});
    rows.push_back({"duration_hours", fmt2(summary.duration_hours)});
    rows.push_back({"u_cpu_eff", fmt2(summary.u_cpu_eff * 100.0) + "%"});
    rows.push_back({"u_gpu_eff", fmt2(summary.u_gpu_eff * 100.0) + "%"});
    rows.push_back({"peak_gpu_mem_gb", fmt2(summary.peak_gpu_mem_gb)});
    rows.push_back({"peak_sys_mem_gb", fmt2(summary.peak_sys_mem_gb)});
    text = align_table(rows);
    if (footprint) text += "\n" + footprint_plain(*footprint);
  } else {
    json j;
    j["source_label"] = trace.source_label;
    j["samples"] = trace.samples.size();
    j["summary"] = {{"u_cpu_eff", summary.u_cpu_eff},
                    {"u_gpu_eff", summary.u_gpu_eff},
                    {"duration_hours", summary.duration_hours},
                    {"peak_gpu_mem_gb", summary.peak_gpu_mem_gb},
                    {"peak_sys_mem_gb", summary.peak_sys_mem_gb}};
    if (footprint) j["footprint"] = footprint_with_equivalences(*footprint);
    text = j.dump(2) + "\n";
  }
  emit(text, a.out, out);
  return 0;
}

struct ScoreArgs {
  std::string pairs, embeddings, format = "structured", out;
};

std::vector<std::string> score_row(const std::string& head, const MetricScore& s) {
  return {head,
          fmt2(s.rouge1.f1 * 100.0),
          fmt2(s.rouge2.f1 * 100.0),
          fmt2(s.rougeL.f1 * 100.0),
          fmt2(s.meteor * 100.0),
          s.bertscore ? fmt2(s.bertscore->f1 * 100.0) : ""};
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto pairs = load_pairs_tsv(fs::path(a.pairs));
  std::optional<std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>>> embeddings;
  if (!a.embeddings.empty())
    embeddings = load_embedding_dir(fs::path(a.embeddings), pairs.size());
  if (pairs.empty()) raise(errc::empty_corpus, a.pairs + ": corpus has no pairs");
  const CorpusScores scores = score_corpus(pairs, embeddings ? &*embeddings : nullptr);

  std::string text;
  switch (parse_format(a.format)) {
    case RenderFormat::structured: {
      json j;
      j["corpus"] = detail::metric_score_to_json(scores.corpus);
      j["pairs"] = json::array();
      for (size_t i = 0; i < scores.per_pair.size(); ++i) {
        json p = detail::metric_score_to_json(scores.per_pair[i]);
        p["index"] = i + 1;
        j["pairs"].push_back(std::move(p));
      }
      j["notes"] = json::array({standard_report_notes().front()});
      text = j.dump(2) + "\n";
      break;
    }
    case RenderFormat::delimited: {
      text = "index,rouge1,rouge2,rougeL,meteor,bertscore\n";
      for (size_t i = 0; i < scores.per_pair.size(); ++i) {
        const auto row = score_row(std::to_string(i + 1), scores.per_pair[i]);
        for (size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + row[c];
        text += "\n";
      }
      const auto row = score_row("corpus", scores.corpus);
      for (size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + row[c];
      text += "\n";
      break;
    }
    case RenderFormat::plain_table: {
      std::vector<std::vector<std::string>> rows;
      rows.push_back({"pair", "rouge1", "rouge2", "rougeL", "meteor", "bertscore"});
      for (size_t i = 0; i < scores.per_pair.size(); ++i)
        rows.push_back(score_row(std::to_string(i + 1), scores.per_pair[i]));
      rows.push_back(score_row("corpus", scores.corpus));
      text = align_table(rows);
      break;
    }
  }
  emit(text, a.out, out);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> scenarios, pairs, embeddings;
  std::string registry, profile, facility, locations, format = "plain-table", out;
  int epochs = 0;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  if (a.pairs.size() != a.scenarios.size()) {
    err << "error: report needs one --pairs file per --scenario (got "
        << a.pairs.size() << " and " << a.scenarios.size() << ")\n";
    return 1;
  }
  if (!a.embeddings.empty() && a.embeddings.size() != a.scenarios.size()) {
    err << "error: --embeddings must be given once per scenario or not at all\n";
    return 1;
  }

  const Registry reg = open_registry(a.registry);
  std::map<std::string, MetricScore> corpus_scores;
  std::map<std::string, FootprintResult> footprints;
  std::vector<std::pair<std::string, RunSpec>> runs;  // label -> run, for sweeps
  std::map<std::string, HardwareProfile> run_hw;

  for (size_t i = 0; i < a.scenarios.size(); ++i) {
    const ResolvedRun r = resolve_run(a.scenarios[i], reg, a.profile, a.facility, a.epochs);
    if (footprints.contains(r.run.label))
      raise(errc::invariant_violation, "duplicate run label '" + r.run.label + "'");
    footprints[r.run.label] = estimate(r.run, r.hw, r.facility);

    const auto pair_texts = load_pairs_tsv(fs::path(a.pairs[i]));
    std::optional<std::vector<std::pair<EmbeddingSeq, EmbeddingSeq>>> embeddings;
    if (!a.embeddings.empty())
      embeddings = load_embedding_dir(fs::path(a.embeddings[i]), pair_texts.size());
    if (pair_texts.empty()) raise(errc::empty_corpus, a.pairs[i] + ": corpus has no pairs");
    corpus_scores[r.run.label] =
        score_corpus(pair_texts, embeddings ? &*embeddings : nullptr).corpus;

    runs.emplace_back(r.run.label, r.run);
    run_hw[r.run.label] = r.hw;
  }

  ReportDocument doc;
  doc.records = build_records(corpus_scores, footprints);
  if (!a.locations.empty()) {
    const auto facilities = resolve_locations(a.locations, reg);
    for (const auto& [label, run] : runs) {
      SweepTable sweep;
      sweep.label = label;
      sweep.entries = sweep_locations(run, run_hw.at(label), facilities);
      doc.sweeps.push_back(std::move(sweep));
    }
  }
  doc.provenance.tool_version = kToolVersion;
  doc.provenance.notes = standard_report_notes();
  for (const auto& s : a.scenarios) doc.provenance.inputs.push_back(s);
  for (const auto& p : a.pairs) doc.provenance.inputs.push_back(p);
  for (const auto& e : a.embeddings) doc.provenance.inputs.push_back(e);
  if (!a.registry.empty()) doc.provenance.inputs.push_back(a.registry);
  if (!a.locations.empty()) doc.provenance.inputs.push_back(a.locations);

  emit(render(doc, parse_format(a.format)), a.out, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy and carbon accounting for model fine-tuning runs", "greenmetrics"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Footprint of a single run scenario");
  est_cmd->add_option("--scenario", est.scenario, "run scenario JSON file")->required();
  est_cmd->add_option("--registry", est.registry, "registry JSON file merged over built-ins");
  est_cmd->add_option("--profile", est.profile, "hardware profile name (overrides scenario)");
  est_cmd->add_option("--facility", est.facility, "facility id (overrides scenario)");
  est_cmd->add_option("--epochs", est.epochs, "epoch count (overrides scenario)")
      ->check(CLI::PositiveNumber);
  est_cmd->add_option("--format", est.format, "output format")
      ->check(CLI::IsMember({"structured", "plain-table"}));
  est_cmd->add_option("--out", est.out, "write results to this file instead of stdout");

  SweepArgs swp;
  auto* swp_cmd = app.add_subcommand("sweep", "Footprint of one run across facilities");
  swp_cmd->add_option("--scenario", swp.scenario, "run scenario JSON file")->required();
  swp_cmd->add_option("--locations", swp.locations,
                      "facility list: JSON file or comma-separated facility ids")
      ->required();
  swp_cmd->add_option("--registry", swp.registry, "registry JSON file merged over built-ins");
  swp_cmd->add_option("--profile", swp.profile, "hardware profile name (overrides scenario)");
  swp_cmd->add_option("--epochs", swp.epochs, "epoch count (overrides scenario)")
      ->check(CLI::PositiveNumber);
  swp_cmd->add_option("--format", swp.format, "output format")
      ->check(CLI::IsMember({"structured", "plain-table", "delimited"}));
  swp_cmd->add_option("--out", swp.out, "write results to this file instead of stdout");

  TelemetryArgs tel;
  auto* tel_cmd = app.add_subcommand("telemetry", "Effective usage factors from a trace");
  tel_cmd->add_option("--trace", tel.trace, "telemetry CSV file")->required();
  tel_cmd->add_option("--registry", tel.registry, "registry JSON file merged over built-ins");
  auto* tel_profile =
      tel_cmd->add_option("--profile", tel.profile, "hardware profile for a footprint estimate");
  auto* tel_facility =
      tel_cmd->add_option("--facility", tel.facility, "facility id for a footprint estimate");
  tel_profile->needs(tel_facility);
  tel_facility->needs(tel_profile);
  tel_cmd->add_option("--format", tel.format, "output format")
      ->check(CLI::IsMember({"structured", "plain-table"}));
  tel_cmd->add_option("--out", tel.out, "write results to this file instead of stdout");

  ScoreArgs sco;
  auto* sco_cmd = app.add_subcommand("score", "Summarization quality metrics for a corpus");
  sco_cmd->add_option("--pairs", sco.pairs, "TSV file: candidate TAB reference")->required();
  sco_cmd->add_option("--embeddings", sco.embeddings,
                      "directory of per-pair embedding files (<n>.cand.emb / <n>.ref.emb)");
  sco_cmd->add_option("--format", sco.format, "output format")
      ->check(CLI::IsMember({"structured", "plain-table", "delimited"}));
  sco_cmd->add_option("--out", sco.out, "write results to this file instead of stdout");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Joined quality and carbon efficiency report");
  rep_cmd->add_option("--scenario", rep.scenarios, "run scenario JSON file (repeat per model)")
      ->required();
  rep_cmd->add_option("--pairs", rep.pairs, "TSV pairs file (repeat per model, same order)")
      ->required();
  rep_cmd->add_option("--embeddings", rep.embeddings,
                      "embedding directory (repeat per model, same order)");
  rep_cmd->add_option("--registry", rep.registry, "registry JSON file merged over built-ins");
  rep_cmd->add_option("--profile", rep.profile, "hardware profile applied to every scenario");
  rep_cmd->add_option("--facility", rep.facility, "facility id applied to every scenario");
  rep_cmd->add_option("--locations", rep.locations,
                      "facility list for per-model sweeps: JSON file or comma-separated ids");
  rep_cmd->add_option("--epochs", rep.epochs, "epoch count applied to every scenario")
      ->check(CLI::PositiveNumber);
  rep_cmd->add_option("--format", rep.format, "output format")
      ->check(CLI::IsMember({"structured", "plain-table", "delimited"}));
  rep_cmd->add_option("--out", rep.out, "write results to this file instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (est_cmd->parsed()) return cmd_estimate(est, out);
    if (swp_cmd->parsed()) return cmd_sweep(swp, out);
    if (tel_cmd->parsed()) return cmd_telemetry(tel, out);
    if (sco_cmd->parsed()) return cmd_score(sco, out);
    if (rep_cmd->parsed()) return cmd_report(rep, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_class(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace greenmetrics::cli
