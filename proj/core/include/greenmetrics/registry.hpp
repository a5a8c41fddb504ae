#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace greenmetrics {

// Per-core CPU power model. `cores` is the chip's core count; a hardware
// profile may override how many of them a run actually gets.
struct CpuSpec {
  std::string model_name;
  int cores = 1;
  double power_per_core_w = 0.0;

  bool operator==(const CpuSpec&) const = default;
};

struct GpuSpec {
  std::string model_name;
  double power_w = 0.0;  // per device

  bool operator==(const GpuSpec&) const = default;
};

// Memory draws power proportional to the capacity that is available to the
// run, not the amount actually consumed.
struct MemorySpec {
  double capacity_gb = 0.0;
  double power_per_gb_w = 0.3725;

  bool operator==(const MemorySpec&) const = default;
};

struct HardwareProfile {
  CpuSpec cpu;
  std::optional<int> cpu_count_override;
  GpuSpec gpu;
  int gpu_count = 0;
  MemorySpec memory;

  int effective_cpu_cores() const {
    return cpu_count_override ? *cpu_count_override : cpu.cores;
  }

  bool operator==(const HardwareProfile&) const = default;
};

// A data-center location: carbon intensity of its grid and its power usage
// effectiveness. PUE = 1.0 is the ideal lower bound; real facilities sit
// above it because non-computing equipment draws power too.
struct FacilityProfile {
  std::string location_id;
  double carbon_intensity_g_per_kwh = 0.0;
  double pue = 1.0;

  bool operator==(const FacilityProfile&) const = default;
};

// Immutable after load; lookups are read-only and safe to share across
// threads. Names are matched exactly and case-sensitively; lookup failures
// list case-insensitive near-matches as suggestions.
class Registry {
 public:
  // Built-in entries only (the calibrated sample rig and the two stock
  // facilities).
  static Registry bundled();

  // Built-ins merged with a registry file; file entries win on name
  // collision.
  static Registry load(const std::filesystem::path& path);
  static Registry from_json_text(std::string_view text, const std::string& origin);

  const CpuSpec& lookup_cpu(std::string_view name) const;
  const GpuSpec& lookup_gpu(std::string_view name) const;
  const FacilityProfile& lookup_facility(std::string_view id) const;

  // Resolves the profile's cpu/gpu references against this registry.
  HardwareProfile lookup_profile(std::string_view name) const;

  std::string to_json_text() const;

  const std::map<std::string, CpuSpec>& cpus() const { return cpus_; }
  const std::map<std::string, GpuSpec>& gpus() const { return gpus_; }
  const std::map<std::string, FacilityProfile>& facilities() const { return facilities_; }

  // Profile entries keep their cpu/gpu references so a user override of a
  // referenced spec flows into the profile.
  struct ProfileEntry {
    std::string cpu_ref;
    std::optional<int> cpu_count_override;
    std::string gpu_ref;
    int gpu_count = 0;
    MemorySpec memory;

    bool operator==(const ProfileEntry&) const = default;
  };
  const std::map<std::string, ProfileEntry>& profiles() const { return profiles_; }

  bool operator==(const Registry&) const = default;

 private:
  Registry() = default;
  void overlay_json_text(std::string_view text, const std::string& origin);
  void validate(const std::string& origin) const;

  std::map<std::string, CpuSpec> cpus_;
  std::map<std::string, GpuSpec> gpus_;
  std::map<std::string, FacilityProfile> facilities_;
  std::map<std::string, ProfileEntry> profiles_;
};

}  // namespace greenmetrics
