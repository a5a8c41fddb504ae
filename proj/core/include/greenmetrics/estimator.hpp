#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "greenmetrics/registry.hpp"

namespace greenmetrics {

// One fine-tuning run. `runtime_hours` is the wall time of a single epoch;
// usage factors are the fraction of rated device power actually drawn.
struct RunSpec {
  std::string label;
  double runtime_hours = 0.0;  // per epoch
  double u_cpu = 1.0;
  double u_gpu = 1.0;
  int epochs = 1;
  std::string profile_ref;
  std::string facility_ref;

  bool operator==(const RunSpec&) const = default;
};

// Per-epoch watt-hours including the facility PUE overhead. Shares are
// fractions of the total; they are undefined (flagged) when the total is
// zero, so degenerate scenarios do not abort sweeps.
struct EnergyBreakdown {
  double cpu_wh = 0.0;
  double gpu_wh = 0.0;
  double memory_wh = 0.0;
  double total_wh = 0.0;
  double share_cpu = 0.0;
  double share_gpu = 0.0;
  double share_memory = 0.0;
  bool shares_defined = false;

  bool operator==(const EnergyBreakdown&) const = default;
};

struct FootprintResult {
  std::string label;
  EnergyBreakdown energy;  // per epoch
  double grams_co2e_per_epoch = 0.0;
  int epochs = 1;
  double grams_co2e_total = 0.0;  // grams_co2e_per_epoch * epochs, exact
  FacilityProfile facility;

  bool operator==(const FootprintResult&) const = default;
};

// A known flight route used to put grams of CO2e in perspective.
// fraction = grams / (per_km_g * distance_km).
struct Equivalence {
  std::string route_label;
  double distance_km = 0.0;
  double per_km_g = 139.0;
  double fraction = 0.0;

  bool operator==(const Equivalence&) const = default;
};

// Instantaneous device power draw in watts, before PUE:
//   n_cpu * P_cpu * u_cpu + n_gpu * P_gpu * u_gpu + mem_gb * P_per_gb
double device_power_w(const HardwareProfile& hw, double u_cpu, double u_gpu);

// Per-resource energy (t * component_W * PUE, in Wh) and carbon
// (total kWh * CI, in grams). Setting gpu_count = 0 reduces the model to the
// homogeneous-core form.
FootprintResult estimate(const RunSpec& run, const HardwareProfile& hw,
                         const FacilityProfile& facility);

// Per-epoch fields unchanged; total grams re-derived for the given count.
FootprintResult scale_to_epochs(FootprintResult result, int epochs);

Equivalence flight_equivalent(double grams, const Equivalence& route);

// One result per facility, ordered as the input list.
std::vector<std::pair<std::string, FootprintResult>> sweep_locations(
    const RunSpec& run, const HardwareProfile& hw,
    const std::vector<FacilityProfile>& facilities);

// Great-circle distance between two (lat, lon) points in degrees, mean
// earth radius 6371 km.
double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg,
                    double lon2_deg);

// The two reference routes, with distances derived from city coordinates.
std::vector<Equivalence> bundled_flight_routes();

// "0.0921" -> "0.09%"; two decimals, matching display rounding elsewhere.
std::string format_percent(double fraction);

// Scenario file: JSON mirroring RunSpec, with runtime given as exactly one
// of {"minutes": x} or {"hours": x}.
RunSpec load_run_spec(const std::filesystem::path& path);
RunSpec run_spec_from_json_text(std::string_view text, const std::string& origin);

}  // namespace greenmetrics
