#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "greenmetrics/estimator.hpp"
#include "greenmetrics/registry.hpp"

namespace greenmetrics {

struct TelemetrySample {
  double t_seconds = 0.0;
  double cpu_util = 0.0;  // fraction in [0,1]
  double gpu_util = 0.0;
  double gpu_mem_gb = 0.0;
  double sys_mem_gb = 0.0;

  bool operator==(const TelemetrySample&) const = default;
};

// Timestamps are strictly increasing; a usable trace has at least two
// samples so it spans a positive duration.
struct TelemetryTrace {
  std::vector<TelemetrySample> samples;
  std::string source_label;

  double duration_seconds() const {
    return samples.empty() ? 0.0
                           : samples.back().t_seconds - samples.front().t_seconds;
  }

  bool operator==(const TelemetryTrace&) const = default;
};

// Time-weighted effective usage factors measured from a trace; these replace
// the 100%-utilization assumption when estimating a run's footprint.
struct UtilizationSummary {
  double u_cpu_eff = 0.0;
  double u_gpu_eff = 0.0;
  double duration_hours = 0.0;
  double peak_gpu_mem_gb = 0.0;
  double peak_sys_mem_gb = 0.0;

  bool operator==(const UtilizationSummary&) const = default;
};

// CSV with header t_seconds,cpu_util,gpu_util,gpu_mem_gb,sys_mem_gb.
// A util column named with a trailing "%" carries percentages and is
// normalized to a fraction at parse time.
TelemetryTrace parse_trace(const std::filesystem::path& path);
TelemetryTrace parse_trace(std::istream& in, const std::string& source_label);

// Left-constant hold: sample i's value applies on [t_i, t_{i+1}); the final
// sample only closes the last interval. Peaks are maxima over all samples.
UtilizationSummary summarize(const TelemetryTrace& trace);

// Builds a single-epoch run over the trace duration with the measured
// effective usage factors and delegates to estimate().
FootprintResult effective_estimate(const TelemetryTrace& trace,
                                   const HardwareProfile& hw,
                                   const FacilityProfile& facility);

}  // namespace greenmetrics
