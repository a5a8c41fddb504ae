#include "greenmetrics/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "greenmetrics/errors.hpp"

namespace greenmetrics {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_field(const std::string& text, const char* column, int row,
                   const std::string& origin) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    raise(errc::schema_violation, origin + ": row " + std::to_string(row) + ": column '" +
                                      column + "' is not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

TelemetryTrace parse_trace(std::istream& in, const std::string& source_label) {
  std::string line;
  int row = 0;

  // Header decides whether util columns carry fractions or percentages.
  if (!std::getline(in, line))
    raise(errc::bad_header, source_label + ": empty file, expected header row");
  ++row;
  auto header = split_csv(line);
  bool cpu_percent = false;
  bool gpu_percent = false;
  const std::vector<std::string> base = {"t_seconds", "cpu_util", "gpu_util",
                                         "gpu_mem_gb", "sys_mem_gb"};
  bool ok = header.size() == base.size();
  if (ok) {
    for (size_t i = 0; i < base.size(); ++i) {
      std::string name = header[i];
      if ((i == 1 || i == 2) && !name.empty() && name.back() == '%') {
        (i == 1 ? cpu_percent : gpu_percent) = true;
        name.pop_back();
      }
      if (name != base[i]) ok = false;
    }
  }
  if (!ok)
    raise(errc::bad_header,
          source_label + ": expected header t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb"
                         " (util columns may end in %)");

  TelemetryTrace trace;
  trace.source_label = source_label;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != base.size())
      raise(errc::schema_violation, source_label + ": row " + std::to_string(row) +
                                        ": expected 5 columns, got " +
                                        std::to_string(fields.size()));
    TelemetrySample s;
    s.t_seconds = parse_field(fields[0], "t_seconds", row, source_label);
    s.cpu_util = parse_field(fields[1], "cpu_util", row, source_label);
    s.gpu_util = parse_field(fields[2], "gpu_util", row, source_label);
    s.gpu_mem_gb = parse_field(fields[3], "gpu_mem_gb", row, source_label);
    s.sys_mem_gb = parse_field(fields[4], "sys_mem_gb", row, source_label);
    if (cpu_percent) s.cpu_util /= 100.0;
    if (gpu_percent) s.gpu_util /= 100.0;

    if (s.t_seconds < 0)
      raise(errc::value_out_of_range,
            source_label + ": row " + std::to_string(row) + ": t_seconds must be >= 0");
    if (!(s.cpu_util >= 0 && s.cpu_util <= 1))
      raise(errc::value_out_of_range,
            source_label + ": row " + std::to_string(row) + ": cpu_util outside [0,1]");
    if (!(s.gpu_util >= 0 && s.gpu_util <= 1))
      raise(errc::value_out_of_range,
            source_label + ": row " + std::to_string(row) + ": gpu_util outside [0,1]");
    if (s.gpu_mem_gb < 0 || s.sys_mem_gb < 0)
      raise(errc::value_out_of_range,
            source_label + ": row " + std::to_string(row) + ": memory columns must be >= 0");
    if (!trace.samples.empty() && s.t_seconds <= trace.samples.back().t_seconds)
      raise(errc::non_monotone_timestamps,
            "non-monotone timestamp at row " + std::to_string(row));
    trace.samples.push_back(s);
  }
  return trace;
}

TelemetryTrace parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::file_unreadable, "cannot read trace file '" + path.string() + "'");
  return parse_trace(in, path.string());
}

UtilizationSummary summarize(const TelemetryTrace& trace) {
  if (trace.samples.size() < 2)
    raise(errc::trace_too_short, "trace '" + trace.source_label +
                                     "' has fewer than 2 samples");
  UtilizationSummary out;
  // Normalizing by the sum of interval widths (not last-first) keeps
  // constant traces exact: a constant 1.0 summarizes to exactly 1.0.
  double width_sum = 0.0;
  double cpu_acc = 0.0;
  double gpu_acc = 0.0;
  for (size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    const double dt = trace.samples[i + 1].t_seconds - trace.samples[i].t_seconds;
    width_sum += dt;
    cpu_acc += trace.samples[i].cpu_util * dt;
    gpu_acc += trace.samples[i].gpu_util * dt;
  }
  out.u_cpu_eff = cpu_acc / width_sum;
  out.u_gpu_eff = gpu_acc / width_sum;
  out.duration_hours = trace.duration_seconds() / 3600.0;
  for (const auto& s : trace.samples) {
    out.peak_gpu_mem_gb = std::max(out.peak_gpu_mem_gb, s.gpu_mem_gb);
    out.peak_sys_mem_gb = std::max(out.peak_sys_mem_gb, s.sys_mem_gb);
  }
  return out;
}

FootprintResult effective_estimate(const TelemetryTrace& trace, const HardwareProfile& hw,
                                   const FacilityProfile& facility) {
  const UtilizationSummary s = summarize(trace);
  RunSpec run;
  run.label = trace.source_label;
  run.runtime_hours = s.duration_hours;
  run.u_cpu = s.u_cpu_eff;
  run.u_gpu = s.u_gpu_eff;
  run.epochs = 1;
  return estimate(run, hw, facility);
}

}  // namespace greenmetrics
