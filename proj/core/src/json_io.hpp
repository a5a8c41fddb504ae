#pragma once

// Internal JSON (de)serialization shared by the report renderer and the CLI.
// Not installed; public headers stay free of the JSON dependency.

#include <cstdio>
#include <string>

#include "greenmetrics/errors.hpp"
#include "greenmetrics/estimator.hpp"
#include "greenmetrics/metrics.hpp"
#include "json.hpp"

namespace greenmetrics::detail {

using nlohmann::json;

inline std::string fmt2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

inline json facility_to_json(const FacilityProfile& fac) {
  return {{"location_id", fac.location_id},
          {"carbon_intensity_g_per_kwh", fac.carbon_intensity_g_per_kwh},
          {"pue", fac.pue}};
}

inline FacilityProfile facility_from_json(const json& j) {
  FacilityProfile fac;
  fac.location_id = j.at("location_id").get<std::string>();
  fac.carbon_intensity_g_per_kwh = j.at("carbon_intensity_g_per_kwh").get<double>();
  fac.pue = j.at("pue").get<double>();
  return fac;
}

inline json energy_to_json(const EnergyBreakdown& e) {
  return {{"cpu_wh", e.cpu_wh},
          {"gpu_wh", e.gpu_wh},
          {"memory_wh", e.memory_wh},
          {"total_wh", e.total_wh},
          {"share_cpu", e.share_cpu},
          {"share_gpu", e.share_gpu},
          {"share_memory", e.share_memory},
          {"shares_defined", e.shares_defined}};
}

inline EnergyBreakdown energy_from_json(const json& j) {
  EnergyBreakdown e;
  e.cpu_wh = j.at("cpu_wh").get<double>();
  e.gpu_wh = j.at("gpu_wh").get<double>();
  e.memory_wh = j.at("memory_wh").get<double>();
  e.total_wh = j.at("total_wh").get<double>();
  e.share_cpu = j.at("share_cpu").get<double>();
  e.share_gpu = j.at("share_gpu").get<double>();
  e.share_memory = j.at("share_memory").get<double>();
  e.shares_defined = j.at("shares_defined").get<bool>();
  return e;
}

inline json footprint_to_json(const FootprintResult& res) {
  return {{"label", res.label},
          {"epochs", res.epochs},
          {"facility", facility_to_json(res.facility)},
          {"energy_per_epoch", energy_to_json(res.energy)},
          {"grams_co2e_per_epoch", res.grams_co2e_per_epoch},
          {"grams_co2e_total", res.grams_co2e_total}};
}

inline FootprintResult footprint_from_json(const json& j) {
  FootprintResult res;
  res.label = j.at("label").get<std::string>();
  res.epochs = j.at("epochs").get<int>();
  res.facility = facility_from_json(j.at("facility"));
  res.energy = energy_from_json(j.at("energy_per_epoch"));
  res.grams_co2e_per_epoch = j.at("grams_co2e_per_epoch").get<double>();
  res.grams_co2e_total = j.at("grams_co2e_total").get<double>();
  return res;
}

inline json prf_to_json(const PRF& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

inline PRF prf_from_json(const json& j) {
  PRF prf;
  prf.precision = j.at("precision").get<double>();
  prf.recall = j.at("recall").get<double>();
  prf.f1 = j.at("f1").get<double>();
  return prf;
}

inline json metric_score_to_json(const MetricScore& score) {
  json j = {{"rouge1", prf_to_json(score.rouge1)},
            {"rouge2", prf_to_json(score.rouge2)},
            {"rougeL", prf_to_json(score.rougeL)},
            {"meteor", score.meteor}};
  if (score.bertscore) j["bertscore"] = prf_to_json(*score.bertscore);
  return j;
}

inline MetricScore metric_score_from_json(const json& j) {
  MetricScore score;
  score.rouge1 = prf_from_json(j.at("rouge1"));
  score.rouge2 = prf_from_json(j.at("rouge2"));
  score.rougeL = prf_from_json(j.at("rougeL"));
  score.meteor = j.at("meteor").get<double>();
  if (j.contains("bertscore")) score.bertscore = prf_from_json(j.at("bertscore"));
  return score;
}

inline json equivalence_to_json(const Equivalence& eq) {
  return {{"kind", "flight"},
          {"route_label", eq.route_label},
          {"distance_km", eq.distance_km},
          {"per_km_g", eq.per_km_g},
          {"fraction", eq.fraction},
          {"percent_display", format_percent(eq.fraction)}};
}

}  // namespace greenmetrics::detail
