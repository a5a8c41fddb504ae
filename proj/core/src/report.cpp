#include "greenmetrics/report.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

#include "greenmetrics/errors.hpp"
#include "greenmetrics/version.hpp"
#include "json_io.hpp"
#include "text_table.hpp"

namespace greenmetrics {

namespace {

using detail::align_table;
using detail::fmt2;
using nlohmann::json;

void derive_ratios(EfficiencyRecord& rec) {
  rec.score_per_kwh.clear();
  rec.grams_per_point.clear();
  const double kwh_total = rec.footprint.energy.total_wh * rec.footprint.epochs * 0.001;
  const auto put = [&](const std::string& name, double raw_score) {
    const double displayed = raw_score * 100.0;
    if (kwh_total > 0) rec.score_per_kwh[name] = displayed / kwh_total;
    if (displayed > 0) rec.grams_per_point[name] = rec.footprint.grams_co2e_total / displayed;
  };
  put("rouge1", rec.scores.rouge1.f1);
  put("rouge2", rec.scores.rouge2.f1);
  put("rougeL", rec.scores.rougeL.f1);
  put("meteor", rec.scores.meteor);
  if (rec.scores.bertscore) put("bertscore", rec.scores.bertscore->f1);
}

// Minimal CSV quoting; labels are the only free-form cells.
std::string csv_cell(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted += "\"";
  return quoted;
}

constexpr const char* kRecordHeader[] = {
    "label",  "rouge1",    "rouge2",          "rougeL",      "meteor",      "bertscore",
    "energy_wh", "grams_per_epoch", "grams_total", "share_gpu", "share_cpu", "share_memory"};

std::vector<std::string> record_cells(const EfficiencyRecord& rec) {
  const auto& fp = rec.footprint;
  std::vector<std::string> cells;
  cells.push_back(rec.model_label);
  cells.push_back(fmt2(rec.scores.rouge1.f1 * 100.0));
  cells.push_back(fmt2(rec.scores.rouge2.f1 * 100.0));
  cells.push_back(fmt2(rec.scores.rougeL.f1 * 100.0));
  cells.push_back(fmt2(rec.scores.meteor * 100.0));
  cells.push_back(rec.scores.bertscore ? fmt2(rec.scores.bertscore->f1 * 100.0) : "");
  cells.push_back(fmt2(fp.energy.total_wh));
  cells.push_back(fmt2(fp.grams_co2e_per_epoch));
  cells.push_back(fmt2(fp.grams_co2e_total));
  if (fp.energy.shares_defined) {
    cells.push_back(fmt2(fp.energy.share_gpu * 100.0));
    cells.push_back(fmt2(fp.energy.share_cpu * 100.0));
    cells.push_back(fmt2(fp.energy.share_memory * 100.0));
  } else {
    cells.insert(cells.end(), {"", "", ""});
  }
  return cells;
}

std::string render_delimited(const ReportDocument& doc) {
  std::string out;
  for (size_t c = 0; c < std::size(kRecordHeader); ++c) {
    if (c > 0) out += ",";
    out += kRecordHeader[c];
  }
  out += "\n";
  for (const auto& rec : doc.records) {
    const auto cells = record_cells(rec);
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ",";
      out += csv_cell(cells[c]);
    }
    out += "\n";
  }
  return out;
}

std::string render_plain(const ReportDocument& doc) {
  std::ostringstream out;
  out << "efficiency report (tool " << doc.provenance.tool_version << ")\n";
  if (!doc.provenance.inputs.empty()) {
    out << "inputs:";
    for (const auto& name : doc.provenance.inputs) out << " " << name;
    out << "\n";
  }
  for (const auto& note : doc.provenance.notes) out << "note: " << note << "\n";
  out << "\n";

  std::vector<std::vector<std::string>> rows;
  rows.emplace_back(std::begin(kRecordHeader), std::end(kRecordHeader));
  for (const auto& rec : doc.records) rows.push_back(record_cells(rec));
  out << align_table(rows);

  for (const auto& sweep : doc.sweeps) {
    out << "\nsweep " << sweep.label << "\n";
    std::vector<std::vector<std::string>> srows;
    srows.push_back({"facility", "ci_g_per_kwh", "pue", "total_wh", "grams_per_epoch",
                     "grams_total"});
    for (const auto& [id, res] : sweep.entries) {
      srows.push_back({id, fmt2(res.facility.carbon_intensity_g_per_kwh),
                       fmt2(res.facility.pue), fmt2(res.energy.total_wh),
                       fmt2(res.grams_co2e_per_epoch), fmt2(res.grams_co2e_total)});
    }
    out << align_table(srows);
  }
  return out.str();
}

std::string render_structured(const ReportDocument& doc) {
  json j;
  j["provenance"] = {{"inputs", doc.provenance.inputs},
                     {"tool_version", doc.provenance.tool_version},
                     {"notes", doc.provenance.notes}};
  j["records"] = json::array();
  j["shares"] = json::array();
  for (const auto& rec : doc.records) {
    json r = {{"label", rec.model_label},
              {"scores", detail::metric_score_to_json(rec.scores)},
              {"footprint", detail::footprint_to_json(rec.footprint)},
              {"derived",
               {{"score_per_kwh", rec.score_per_kwh},
                {"grams_per_point", rec.grams_per_point}}}};
    j["records"].push_back(std::move(r));
    const auto& e = rec.footprint.energy;
    j["shares"].push_back({{"label", rec.model_label},
                           {"defined", e.shares_defined},
                           {"share_gpu", e.share_gpu},
                           {"share_cpu", e.share_cpu},
                           {"share_memory", e.share_memory}});
  }
  j["sweeps"] = json::array();
  for (const auto& sweep : doc.sweeps) {
    json entries = json::array();
    for (const auto& [id, res] : sweep.entries)
      entries.push_back({{"facility_id", id}, {"result", detail::footprint_to_json(res)}});
    j["sweeps"].push_back({{"label", sweep.label}, {"entries", std::move(entries)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace

std::vector<std::string> standard_report_notes() {
  return {
      "metrics: clipped-count ROUGE with harmonic F1; METEOR exact-match variant "
      "(10/9 recall weighting, 0.5 penalty weight, cubic chunk exponent; no stemming "
      "or synonym stages); BERTScore without IDF weighting or baseline rescaling",
      "efficiency ratios (score_per_kwh, grams_per_point) are derived analysis "
      "joining quality scores with footprint results",
  };
}

std::vector<EfficiencyRecord> build_records(
    const std::map<std::string, MetricScore>& scores,
    const std::map<std::string, FootprintResult>& footprints) {
  std::vector<std::string> only_scores;
  std::vector<std::string> only_footprints;
  for (const auto& [label, _] : scores)
    if (!footprints.contains(label)) only_scores.push_back(label);
  for (const auto& [label, _] : footprints)
    if (!scores.contains(label)) only_footprints.push_back(label);
  if (!only_scores.empty() || !only_footprints.empty()) {
    std::string msg = "label sets differ;";
    auto list = [&msg](const char* side, const std::vector<std::string>& labels) {
      if (labels.empty()) return;
      msg += std::string(" only in ") + side + ":";
      for (const auto& l : labels) msg += " '" + l + "'";
    };
    list("scores", only_scores);
    list("footprints", only_footprints);
    raise(errc::label_mismatch, msg);
  }

  std::vector<EfficiencyRecord> records;
  records.reserve(scores.size());
  for (const auto& [label, score] : scores) {  // std::map iterates sorted
    EfficiencyRecord rec;
    rec.model_label = label;
    rec.scores = score;
    rec.footprint = footprints.at(label);
    derive_ratios(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string render(const ReportDocument& document, RenderFormat format) {
  switch (format) {
    case RenderFormat::plain_table: return render_plain(document);
    case RenderFormat::delimited: return render_delimited(document);
    case RenderFormat::structured: return render_structured(document);
  }
  return "";
}

ReportDocument parse_structured_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(errc::schema_violation, std::string("report document: invalid JSON: ") + e.what());
  }
  ReportDocument doc;
  try {
    doc.provenance.inputs = j.at("provenance").at("inputs").get<std::vector<std::string>>();
    doc.provenance.tool_version = j.at("provenance").at("tool_version").get<std::string>();
    doc.provenance.notes = j.at("provenance").at("notes").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) {
      EfficiencyRecord rec;
      rec.model_label = r.at("label").get<std::string>();
      rec.scores = detail::metric_score_from_json(r.at("scores"));
      rec.footprint = detail::footprint_from_json(r.at("footprint"));
      derive_ratios(rec);  // derived values are never trusted from input
      doc.records.push_back(std::move(rec));
    }
    for (const auto& s : j.at("sweeps")) {
      SweepTable sweep;
      sweep.label = s.at("label").get<std::string>();
      for (const auto& e : s.at("entries"))
        sweep.entries.emplace_back(e.at("facility_id").get<std::string>(),
                                   detail::footprint_from_json(e.at("result")));
      doc.sweeps.push_back(std::move(sweep));
    }
  } catch (const json::exception& e) {
    raise(errc::schema_violation, std::string("report document: ") + e.what());
  }
  return doc;
}

}  // namespace greenmetrics
