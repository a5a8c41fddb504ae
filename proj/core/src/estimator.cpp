#include "greenmetrics/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "greenmetrics/errors.hpp"
#include "json.hpp"

namespace greenmetrics {

namespace {

using nlohmann::json;

constexpr double kEarthRadiusKm = 6371.0;

void check_usage(double u, const char* which) {
  if (!(u >= 0.0 && u <= 1.0)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s usage factor %g outside [0,1]", which, u);
    raise(errc::usage_out_of_range, buf);
  }
}

}  // namespace

double device_power_w(const HardwareProfile& hw, double u_cpu, double u_gpu) {
  check_usage(u_cpu, "cpu");
  check_usage(u_gpu, "gpu");
  const double cpu_w = hw.effective_cpu_cores() * hw.cpu.power_per_core_w * u_cpu;
  const double gpu_w = hw.gpu_count * hw.gpu.power_w * u_gpu;
  const double mem_w = hw.memory.capacity_gb * hw.memory.power_per_gb_w;
  return cpu_w + gpu_w + mem_w;
}

FootprintResult estimate(const RunSpec& run, const HardwareProfile& hw,
                         const FacilityProfile& facility) {
  check_usage(run.u_cpu, "cpu");
  check_usage(run.u_gpu, "gpu");
  if (run.runtime_hours < 0)
    raise(errc::negative_runtime, "runtime_hours must be >= 0");

  const double t = run.runtime_hours;
  const double pue = facility.pue;

  FootprintResult res;
  res.label = run.label;
  res.facility = facility;
  res.energy.cpu_wh = t * (hw.effective_cpu_cores() * hw.cpu.power_per_core_w * run.u_cpu) * pue;
  res.energy.gpu_wh = t * (hw.gpu_count * hw.gpu.power_w * run.u_gpu) * pue;
  res.energy.memory_wh = t * (hw.memory.capacity_gb * hw.memory.power_per_gb_w) * pue;
  res.energy.total_wh = res.energy.cpu_wh + res.energy.gpu_wh + res.energy.memory_wh;
  if (res.energy.total_wh > 0) {
    res.energy.shares_defined = true;
    res.energy.share_cpu = res.energy.cpu_wh / res.energy.total_wh;
    res.energy.share_gpu = res.energy.gpu_wh / res.energy.total_wh;
    res.energy.share_memory = res.energy.memory_wh / res.energy.total_wh;
  }
  res.grams_co2e_per_epoch = res.energy.total_wh * 0.001 * facility.carbon_intensity_g_per_kwh;
  res.epochs = run.epochs;
  res.grams_co2e_total = res.grams_co2e_per_epoch * run.epochs;
  return res;
}

FootprintResult scale_to_epochs(FootprintResult result, int epochs) {
  result.epochs = epochs;
  result.grams_co2e_total = result.grams_co2e_per_epoch * epochs;
  return result;
}

Equivalence flight_equivalent(double grams, const Equivalence& route) {
  if (!(route.distance_km > 0))
    raise(errc::non_positive_distance,
          "route '" + route.route_label + "' needs a positive distance");
  if (!(route.per_km_g > 0))
    raise(errc::invariant_violation,
          "route '" + route.route_label + "' needs a positive per-km footprint");
  Equivalence out = route;
  out.fraction = grams / (route.per_km_g * route.distance_km);
  return out;
}

std::vector<std::pair<std::string, FootprintResult>> sweep_locations(
    const RunSpec& run, const HardwareProfile& hw,
    const std::vector<FacilityProfile>& facilities) {
  if (facilities.empty())
    raise(errc::empty_facility_list, "location sweep needs at least one facility");
  std::vector<std::pair<std::string, FootprintResult>> results;
  results.reserve(facilities.size());
  for (const auto& fac : facilities)
    results.emplace_back(fac.location_id, estimate(run, hw, fac));
  return results;
}

double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi1 = lat1_deg * deg;
  const double phi2 = lat2_deg * deg;
  const double dphi = (lat2_deg - lat1_deg) * deg;
  const double dlambda = (lon2_deg - lon1_deg) * deg;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<Equivalence> bundled_flight_routes() {
  // Paris 48.8566N 2.3522E, London 51.5074N 0.1278W,
  // Kolkata 22.5726N 88.3639E, Dehradun 30.3165N 78.0322E.
  return {
      {"paris-london", haversine_km(48.8566, 2.3522, 51.5074, -0.1278), 139.0, 0.0},
      {"kolkata-dehradun", haversine_km(22.5726, 88.3639, 30.3165, 78.0322), 139.0, 0.0},
  };
}

std::string format_percent(double fraction) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return buf;
}

namespace {

[[noreturn]] void scenario_error(const std::string& origin, const std::string& what) {
  raise(errc::schema_violation, origin + ": " + what);
}

}  // namespace

RunSpec run_spec_from_json_text(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    scenario_error(origin, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) scenario_error(origin, "top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "label" && key != "runtime" && key != "u_cpu" && key != "u_gpu" &&
        key != "epochs" && key != "profile_ref" && key != "facility_ref")
      scenario_error(origin, "unknown key '" + key + "'");
  }

  RunSpec run;
  if (!doc.contains("label") || !doc.at("label").is_string())
    scenario_error(origin, "missing string field 'label'");
  run.label = doc.at("label").get<std::string>();

  if (!doc.contains("runtime") || !doc.at("runtime").is_object())
    scenario_error(origin, "missing object field 'runtime'");
  const json& rt = doc.at("runtime");
  const bool has_min = rt.contains("minutes");
  const bool has_hr = rt.contains("hours");
  if (has_min == has_hr)
    scenario_error(origin, "'runtime' must hold exactly one of 'minutes' or 'hours'");
  for (const auto& [key, _] : rt.items()) {
    if (key != "minutes" && key != "hours")
      scenario_error(origin, "runtime: unknown key '" + key + "'");
  }
  const json& rv = has_min ? rt.at("minutes") : rt.at("hours");
  if (!rv.is_number()) scenario_error(origin, "runtime value must be a number");
  run.runtime_hours = has_min ? rv.get<double>() / 60.0 : rv.get<double>();
  if (run.runtime_hours < 0)
    raise(errc::negative_runtime, origin + ": runtime must be >= 0");

  auto number_field = [&](const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_number()) scenario_error(origin, std::string("field '") + key + "' must be a number");
    return doc.at(key).get<double>();
  };
  run.u_cpu = number_field("u_cpu", 1.0);
  run.u_gpu = number_field("u_gpu", 1.0);
  if (!(run.u_cpu >= 0 && run.u_cpu <= 1) || !(run.u_gpu >= 0 && run.u_gpu <= 1))
    raise(errc::usage_out_of_range, origin + ": usage factors must lie in [0,1]");

  if (doc.contains("epochs")) {
    if (!doc.at("epochs").is_number_integer())
      scenario_error(origin, "field 'epochs' must be an integer");
    run.epochs = doc.at("epochs").get<int>();
    if (run.epochs < 1)
      raise(errc::value_out_of_range, origin + ": epochs must be >= 1");
  }
  if (doc.contains("profile_ref")) {
    if (!doc.at("profile_ref").is_string()) scenario_error(origin, "field 'profile_ref' must be a string");
    run.profile_ref = doc.at("profile_ref").get<std::string>();
  }
  if (doc.contains("facility_ref")) {
    if (!doc.at("facility_ref").is_string()) scenario_error(origin, "field 'facility_ref' must be a string");
    run.facility_ref = doc.at("facility_ref").get<std::string>();
  }
  return run;
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::file_unreadable, "cannot read scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_spec_from_json_text(buf.str(), path.string());
}

}  // namespace greenmetrics
