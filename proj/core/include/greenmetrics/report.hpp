#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "greenmetrics/estimator.hpp"
#include "greenmetrics/metrics.hpp"

namespace greenmetrics {

// Quality joined with carbon cost. The derived ratios are recomputed from
// scores and footprint, never stored independently; grams_per_point exists
// only for nonzero scores and score_per_kwh only for nonzero total energy.
// Scores enter the ratios on the displayed x100 scale.
struct EfficiencyRecord {
  std::string model_label;
  MetricScore scores;
  FootprintResult footprint;
  std::map<std::string, double> score_per_kwh;
  std::map<std::string, double> grams_per_point;

  bool operator==(const EfficiencyRecord&) const = default;
};

struct SweepTable {
  std::string label;
  std::vector<std::pair<std::string, FootprintResult>> entries;

  bool operator==(const SweepTable&) const = default;
};

struct Provenance {
  std::vector<std::string> inputs;
  std::string tool_version;
  std::vector<std::string> notes;

  bool operator==(const Provenance&) const = default;
};

struct ReportDocument {
  std::vector<EfficiencyRecord> records;
  std::vector<SweepTable> sweeps;
  Provenance provenance;

  bool operator==(const ReportDocument&) const = default;
};

enum class RenderFormat { plain_table, delimited, structured };

// One record per label, sorted lexicographically. The two label sets must
// match exactly; the error lists the asymmetric difference.
std::vector<EfficiencyRecord> build_records(
    const std::map<std::string, MetricScore>& scores,
    const std::map<std::string, FootprintResult>& footprints);

// Byte-identical output for identical inputs. The structured form is a
// single JSON document carrying full precision; display rounding to two
// decimals applies to the plain-table and delimited forms only.
std::string render(const ReportDocument& document, RenderFormat format);

// Inverse of render(..., structured), for round-tripping reports.
ReportDocument parse_structured_report(const std::string& text);

// Fixed notes shipped in every report's provenance: the metric variants
// implemented here and the derived (not externally reported) nature of the
// efficiency ratios.
std::vector<std::string> standard_report_notes();

}  // namespace greenmetrics
