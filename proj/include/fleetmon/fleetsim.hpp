#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fleetmon/recording.hpp"

namespace fleetmon {

struct StationaryProfile {
  double rpm = 820.0;
};

/// Linear ramp from rpm_start to rpm_end over duration_s, then constant.
/// duration_s <= 0 ramps over the whole scenario.
struct RunupProfile {
  double rpm_start = 0.0;
  double rpm_end = 1200.0;
  double duration_s = 0.0;
};

using SpeedProfile = std::variant<StationaryProfile, RunupProfile>;

/// Above onset_rpm the fault signature fades linearly, vanishing at zero_rpm.
struct FluxWeakening {
  bool enabled = true;
  double onset_rpm = 1385.0;
  double zero_rpm = 1420.0;
};

/// Synthetic fleet scenario. All amplitudes and gains are invented defaults
/// chosen so that the healthy amplitude spread exceeds the fault's effect on
/// the fundamental while the third harmonic stays separable.
struct ScenarioConfig {
  SignalKind signal = SignalKind::current;
  std::size_t machine_count = 10;
  std::vector<std::string> faulty_ids{"D1_2", "D2_10"};
  SpeedProfile speed = StationaryProfile{};
  bool load = true;
  int pole_pairs = 2;
  double sample_rate = 0.0;  // 0: 25600 Hz for current, 12800 Hz for vibration
  double duration_s = 30.0;
  double noise_level = 0.01;  // white noise sd relative to the nominal amplitude
  double amplitude = 1.0;
  double amplitude_spread = 0.2;  // per-machine factor drawn from [1 - s, 1 + s]
  double fault_gain = 0.15;       // third-harmonic ratio of a faulty machine
  double residual_h3 = 0.02;      // third-harmonic ratio of a healthy machine
  double vibration_jitter = 0.2;
  double vibration_gain_min = 1.5;
  double vibration_gain_max = 3.0;
  FluxWeakening flux;
  std::map<std::string, double> speed_offset_rpm;
  std::uint64_t seed = 1;

  double effective_sample_rate() const;
  std::vector<std::string> machine_ids() const;

  /// Throws InvalidConfig.
  void validate() const;
};

struct GroundTruth {
  std::vector<std::string> machine_ids;
  std::vector<bool> faulty;
};

/// pole_pairs * rpm / 60.
double speed_to_fundamental(double rpm, int pole_pairs);

/// Scalar in [0, 1] scaling the fault signature at a given speed.
double fault_visibility(const FluxWeakening& flux, double rpm);

/// Shaft speed of the fleet at time t (without per-machine offsets).
double speed_at(const SpeedProfile& profile, double t, double scenario_duration_s);

std::pair<FleetRecording, GroundTruth> generate_current(const ScenarioConfig& config);
std::pair<FleetRecording, GroundTruth> generate_vibration(const ScenarioConfig& config);

/// Dispatches on config.signal.
std::pair<FleetRecording, GroundTruth> generate(const ScenarioConfig& config);

/// Writes the pipeline CSV format; throws IoError.
void export_csv(const FleetRecording& recording, const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const GroundTruth& truth);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
GroundTruth truth_from_json(const nlohmann::json& j);

/// Sidecar {"scenario": ..., "ground_truth": ...}; throws IoError.
void write_sidecar(const ScenarioConfig& config, const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace fleetmon
