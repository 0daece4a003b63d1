#include "fleetmon/fleetsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLoadedScale = 1.25;
constexpr double kUnloadedVibrationNoise = 3.0;
// Relative level of vibration harmonics 1..6 and of the X/Y/Z axes.
constexpr double kVibrationHarmonics[6] = {1.0, 0.6, 0.3, 0.25, 0.2, 0.15};
constexpr double kAxisScale[3] = {1.0, 0.8, 0.6};

std::mt19937_64 machine_engine(std::uint64_t seed, std::size_t machine, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(machine), stream};
  return std::mt19937_64(seq);
}

// Integral of the fleet speed (rpm * s) from 0 to t.
double speed_integral(const SpeedProfile& profile, double t, double scenario_duration_s) {
  if (const auto* s = std::get_if<StationaryProfile>(&profile)) return s->rpm * t;
  const auto& r = std::get<RunupProfile>(profile);
  const double ramp = r.duration_s > 0.0 ? r.duration_s : scenario_duration_s;
  const double slope = (r.rpm_end - r.rpm_start) / ramp;
  if (t <= ramp) return r.rpm_start * t + 0.5 * slope * t * t;
  return r.rpm_start * ramp + 0.5 * slope * ramp * ramp + r.rpm_end * (t - ramp);
}

struct Timeline {
  std::vector<double> rpm;
  std::vector<double> visibility;
};

Timeline fleet_timeline(const ScenarioConfig& c, std::size_t samples, double rate) {
  Timeline tl;
  tl.rpm.resize(samples);
  tl.visibility.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / rate;
    tl.rpm[k] = speed_at(c.speed, t, c.duration_s);
    tl.visibility[k] = fault_visibility(c.flux, tl.rpm[k]);
  }
  return tl;
}

std::vector<double> machine_phase(const ScenarioConfig& c, const std::string& id, std::size_t samples,
                                  double rate) {
  const auto off = c.speed_offset_rpm.find(id);
  const double offset = off == c.speed_offset_rpm.end() ? 0.0 : off->second;
  const double per_rpm_second = kTwoPi * c.pole_pairs / 60.0;
  std::vector<double> theta(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / rate;
    theta[k] = per_rpm_second * (speed_integral(c.speed, t, c.duration_s) + offset * t);
  }
  return theta;
}

GroundTruth make_truth(const ScenarioConfig& c) {
  GroundTruth truth{c.machine_ids(), {}};
  for (const auto& id : truth.machine_ids) {
    truth.faulty.push_back(std::find(c.faulty_ids.begin(), c.faulty_ids.end(), id) != c.faulty_ids.end());
  }
  return truth;
}

std::size_t sample_count(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::llround(c.duration_s * c.effective_sample_rate()));
}

}  // namespace

double ScenarioConfig::effective_sample_rate() const {
  if (sample_rate > 0.0) return sample_rate;
  return signal == SignalKind::current ? 25600.0 : 12800.0;
}

std::vector<std::string> ScenarioConfig::machine_ids() const {
  std::vector<std::string> ids;
  const std::size_t first_group = (machine_count + 1) / 2;
  for (std::size_t i = 0; i < machine_count; ++i) {
    ids.push_back((i < first_group ? "D1_" : "D2_") + std::to_string(i + 1));
  }
  return ids;
}

void ScenarioConfig::validate() const {
  const auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (machine_count < 2) fail("machine_count must be >= 2");
  const auto ids = machine_ids();
  for (const auto& f : faulty_ids) {
    if (std::find(ids.begin(), ids.end(), f) == ids.end()) fail("faulty id '" + f + "' is not a fleet machine");
    if (std::count(faulty_ids.begin(), faulty_ids.end(), f) > 1) fail("faulty id '" + f + "' listed twice");
  }
  if (2 * faulty_ids.size() >= machine_count) fail("faulty machines must be a strict minority of the fleet");
  if (!(flux.onset_rpm < flux.zero_rpm)) fail("flux weakening onset must be below the zero-signature speed");
  if (pole_pairs < 1) fail("pole_pairs must be >= 1");
  if (sample_rate < 0.0 || !(duration_s > 0.0)) fail("sample rate and duration must be positive");
  if (noise_level < 0.0 || !(amplitude > 0.0)) fail("noise must be >= 0 and amplitude > 0");
  if (amplitude_spread < 0.0 || amplitude_spread >= 1.0) fail("amplitude_spread must be in [0, 1)");
  if (vibration_jitter < 0.0 || vibration_jitter >= 1.0) fail("vibration_jitter must be in [0, 1)");
  if (vibration_gain_min > vibration_gain_max || vibration_gain_min <= 0.0) fail("invalid vibration gain range");
  if (fault_gain < 0.0 || residual_h3 < 0.0) fail("harmonic ratios must be >= 0");
  for (const auto& [id, off] : speed_offset_rpm) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) fail("speed offset for unknown machine '" + id + "'");
  }
  if (const auto* s = std::get_if<StationaryProfile>(&speed); s && s->rpm < 0.0) fail("rpm must be >= 0");
  if (const auto* r = std::get_if<RunupProfile>(&speed); r && (r->rpm_start < 0.0 || r->rpm_end < 0.0)) {
    fail("rpm must be >= 0");
  }
  if (sample_count(*this) < 2) fail("scenario holds fewer than two samples");
}

double speed_to_fundamental(double rpm, int pole_pairs) {
  if (rpm < 0.0) throw Error(ErrorCode::InvalidArgument, "rpm must be >= 0");
  return pole_pairs * rpm / 60.0;
}

double fault_visibility(const FluxWeakening& flux, double rpm) {
  if (!flux.enabled || rpm <= flux.onset_rpm) return 1.0;
  if (rpm >= flux.zero_rpm) return 0.0;
  return (flux.zero_rpm - rpm) / (flux.zero_rpm - flux.onset_rpm);
}

double speed_at(const SpeedProfile& profile, double t, double scenario_duration_s) {
  if (const auto* s = std::get_if<StationaryProfile>(&profile)) return s->rpm;
  const auto& r = std::get<RunupProfile>(profile);
  const double ramp = r.duration_s > 0.0 ? r.duration_s : scenario_duration_s;
  return r.rpm_start + (r.rpm_end - r.rpm_start) * std::min(t / ramp, 1.0);
}

std::pair<FleetRecording, GroundTruth> generate_current(const ScenarioConfig& c) {
  if (c.signal != SignalKind::current) throw Error(ErrorCode::InvalidConfig, "scenario is not a current scenario");
  c.validate();
  const double rate = c.effective_sample_rate();
  const std::size_t n = sample_count(c);
  const Timeline tl = fleet_timeline(c, n, rate);
  GroundTruth truth = make_truth(c);

  FleetRecording rec;
  rec.kind = SignalKind::current;
  rec.machine_ids = truth.machine_ids;
  rec.rpm = tl.rpm;
  const double base = c.amplitude * (c.load ? kLoadedScale : 1.0);
  for (std::size_t m = 0; m < c.machine_count; ++m) {
    auto engine = machine_engine(c.seed, m, 0xC0u);
    std::uniform_real_distribution<double> spread(1.0 - c.amplitude_spread, 1.0 + c.amplitude_spread);
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    std::normal_distribution<double> noise(0.0, c.noise_level * c.amplitude);
    const double amp = base * spread(engine);
    const double phase = phase_dist(engine);
    const auto theta = machine_phase(c, truth.machine_ids[m], n, rate);

    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double h3 = truth.faulty[m] ? c.residual_h3 + tl.visibility[k] * std::max(0.0, c.fault_gain - c.residual_h3)
                                        : c.residual_h3;
      const double arg = theta[k] + phase;
      x[k] = amp * (std::sin(arg) + h3 * std::sin(3.0 * arg));
      if (c.noise_level > 0.0) x[k] += noise(engine);
    }
    rec.streams.push_back(Series::scalar(std::move(x), rate));
  }
  return {std::move(rec), std::move(truth)};
}

std::pair<FleetRecording, GroundTruth> generate_vibration(const ScenarioConfig& c) {
  if (c.signal != SignalKind::vibration) throw Error(ErrorCode::InvalidConfig, "scenario is not a vibration scenario");
  c.validate();
  const double rate = c.effective_sample_rate();
  const std::size_t n = sample_count(c);
  const Timeline tl = fleet_timeline(c, n, rate);
  GroundTruth truth = make_truth(c);

  FleetRecording rec;
  rec.kind = SignalKind::vibration;
  rec.machine_ids = truth.machine_ids;
  rec.rpm = tl.rpm;
  const double base = c.amplitude * (c.load ? kLoadedScale : 1.0);
  const double noise_sd = c.noise_level * c.amplitude * (c.load ? 1.0 : kUnloadedVibrationNoise);
  for (std::size_t m = 0; m < c.machine_count; ++m) {
    auto engine = machine_engine(c.seed, m, 0x5Au);
    std::uniform_real_distribution<double> jitter(1.0 - c.vibration_jitter, 1.0 + c.vibration_jitter);
    std::uniform_real_distribution<double> phase_dist(0.0, kTwoPi);
    std::uniform_real_distribution<double> gain_dist(c.vibration_gain_min, c.vibration_gain_max);
    std::normal_distribution<double> noise(0.0, noise_sd);

    double amp[3][6];
    double phase[3][6];
    for (int a = 0; a < 3; ++a) {
      for (int k = 0; k < 6; ++k) {
        amp[a][k] = base * kAxisScale[a] * kVibrationHarmonics[k] * jitter(engine);
        phase[a][k] = phase_dist(engine);
      }
    }
    // Fault: a machine-specific subset of harmonics 3..6 (at least two) is amplified.
    double gain[6] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    if (truth.faulty[m]) {
      std::vector<int> harmonics{2, 3, 4, 5};  // zero-based 3..6
      std::shuffle(harmonics.begin(), harmonics.end(), engine);
      const auto count = std::uniform_int_distribution<int>(2, 4)(engine);
      for (int h = 0; h < count; ++h) gain[harmonics[static_cast<std::size_t>(h)]] = gain_dist(engine);
    }

    const auto theta = machine_phase(c, truth.machine_ids[m], n, rate);
    std::vector<double> xyz(3 * n);
    for (std::size_t s = 0; s < n; ++s) {
      for (int a = 0; a < 3; ++a) {
        double v = 0.0;
        for (int k = 0; k < 6; ++k) {
          const double g = 1.0 + tl.visibility[s] * (gain[k] - 1.0);
          v += g * amp[a][k] * std::sin((k + 1) * theta[s] + phase[a][k]);
        }
        if (noise_sd > 0.0) v += noise(engine);
        xyz[3 * s + static_cast<std::size_t>(a)] = v;
      }
    }
    rec.streams.emplace_back(std::move(xyz), 3, rate);
  }
  return {std::move(rec), std::move(truth)};
}

std::pair<FleetRecording, GroundTruth> generate(const ScenarioConfig& config) {
  return config.signal == SignalKind::current ? generate_current(config) : generate_vibration(config);
}

void export_csv(const FleetRecording& recording, const std::filesystem::path& path) {
  write_fleet_csv(recording, path);
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json speed;
  if (const auto* s = std::get_if<StationaryProfile>(&c.speed)) {
    speed = {{"type", "stationary"}, {"rpm", s->rpm}};
  } else {
    const auto& r = std::get<RunupProfile>(c.speed);
    speed = {{"type", "runup"}, {"rpm_start", r.rpm_start}, {"rpm_end", r.rpm_end}, {"duration_s", r.duration_s}};
  }
  return {
      {"signal", to_string(c.signal)},
      {"machine_count", c.machine_count},
      {"faulty_ids", c.faulty_ids},
      {"speed", speed},
      {"load", c.load},
      {"pole_pairs", c.pole_pairs},
      {"sample_rate", c.effective_sample_rate()},
      {"duration_s", c.duration_s},
      {"noise_level", c.noise_level},
      {"amplitude", c.amplitude},
      {"amplitude_spread", c.amplitude_spread},
      {"fault_gain", c.fault_gain},
      {"residual_h3", c.residual_h3},
      {"vibration_jitter", c.vibration_jitter},
      {"vibration_gain_min", c.vibration_gain_min},
      {"vibration_gain_max", c.vibration_gain_max},
      {"flux_weakening", {{"enabled", c.flux.enabled}, {"onset_rpm", c.flux.onset_rpm}, {"zero_rpm", c.flux.zero_rpm}}},
      {"speed_offset_rpm", c.speed_offset_rpm},
      {"seed", c.seed},
  };
}

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t m = 0; m < truth.machine_ids.size(); ++m) j[truth.machine_ids[m]] = static_cast<bool>(truth.faulty[m]);
  return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be a JSON object");
    if (j.contains("signal")) c.signal = signal_kind_from_string(j.at("signal").get<std::string>());
    c.machine_count = j.value("machine_count", c.machine_count);
    c.faulty_ids = j.value("faulty_ids", c.faulty_ids);
    if (j.contains("speed")) {
      const auto& s = j.at("speed");
      const auto type = s.value("type", std::string("stationary"));
      if (type == "stationary") {
        c.speed = StationaryProfile{s.value("rpm", 820.0)};
      } else if (type == "runup") {
        c.speed = RunupProfile{s.value("rpm_start", 0.0), s.value("rpm_end", 1200.0), s.value("duration_s", 0.0)};
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown speed profile '" + type + "'");
      }
    }
    c.load = j.value("load", c.load);
    c.pole_pairs = j.value("pole_pairs", c.pole_pairs);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.duration_s = j.value("duration_s", c.duration_s);
    c.noise_level = j.value("noise_level", c.noise_level);
    c.amplitude = j.value("amplitude", c.amplitude);
    c.amplitude_spread = j.value("amplitude_spread", c.amplitude_spread);
    c.fault_gain = j.value("fault_gain", c.fault_gain);
    c.residual_h3 = j.value("residual_h3", c.residual_h3);
    c.vibration_jitter = j.value("vibration_jitter", c.vibration_jitter);
    c.vibration_gain_min = j.value("vibration_gain_min", c.vibration_gain_min);
    c.vibration_gain_max = j.value("vibration_gain_max", c.vibration_gain_max);
    if (j.contains("flux_weakening")) {
      const auto& f = j.at("flux_weakening");
      c.flux.enabled = f.value("enabled", c.flux.enabled);
      c.flux.onset_rpm = f.value("onset_rpm", c.flux.onset_rpm);
      c.flux.zero_rpm = f.value("zero_rpm", c.flux.zero_rpm);
    }
    c.speed_offset_rpm = j.value("speed_offset_rpm", c.speed_offset_rpm);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("scenario: ") + e.what());
  }
  c.validate();
  return c;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth truth;
  try {
    for (const auto& [id, faulty] : j.items()) {
      truth.machine_ids.push_back(id);
      truth.faulty.push_back(faulty.get<bool>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("ground truth: ") + e.what());
  }
  return truth;
}

void write_sidecar(const ScenarioConfig& config, const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  const nlohmann::json j{{"scenario", to_json(config)}, {"ground_truth", to_json(truth)}};
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace fleetmon
