#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fleetmon/clustering.hpp"
#include "fleetmon/detection.hpp"
#include "fleetmon/fleetsim.hpp"
#include "fleetmon/recording.hpp"

namespace fleetmon {

/// Named analysis recipes.
///   waveform:           minmax, per-period resampling, Psi-DTW warping amount
///   harmonic:           log spectrum, minmax, third-harmonic difference
///   spectrogram:        low-passed log spectrogram compared with classic DTW
///   vibration_features: harmonics 3..6 of every axis, fleet-wise percentile
///                       scaling, Euclidean distance
enum class Variant { waveform, harmonic, spectrogram, vibration_features };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);

struct VariantConfig {
  Variant variant = Variant::waveform;
  double thr_cc = 0.9;
  double thr_ad = kDefaultAnomalyThreshold;
  int debounce_n = 5;
  double window_s = 0.5;
  Linkage linkage = Linkage::single;
  CostMode cost = CostMode::diff_norm;
  std::vector<double> thr_cc_grid = default_thr_cc_grid();

  // waveform
  std::size_t psi = 25;
  int samples_per_period = 50;
  // harmonic
  int harmonic_k = 3;
  double half_window_hz = 5.0;
  double log_floor = 1e-6;
  // spectrogram
  double frame_s = 0.05;
  double lowpass_hz = 200.0;
  // vibration_features
  int harmonic_first = 3;
  int harmonic_last = 6;
  int pole_pairs = 2;
  /// Unset: the variant's default (percentile for vibration_features,
  /// minmax otherwise).
  std::optional<NormMode> normalization;

  NormMode effective_normalization() const;
  /// Throws InvalidConfig.
  void validate() const;
};

nlohmann::json to_json(const VariantConfig& config);
/// Missing keys keep their defaults. Throws InvalidConfig.
VariantConfig variant_config_from_json(const nlohmann::json& j);

struct BaselineConfig {
  std::vector<double> sigma_grid = default_sigma_grid();
  int debounce_n = 5;
  double window_s = 0.5;
  int harmonic_k = 3;  // current indicator
  int harmonic_first = 3;  // vibration indicators
  int harmonic_last = 6;
  double half_window_hz = 5.0;
  int pole_pairs = 2;
  bool leave_one_out = false;

  void validate() const;
};

nlohmann::json to_json(const BaselineConfig& config);
BaselineConfig baseline_config_from_json(const nlohmann::json& j);

/// Reads the fleet CSV format. Throws IoError, ParseError, RaggedColumns,
/// RateMismatch.
FleetRecording ingest_csv(const std::filesystem::path& path);

/// floor(duration / window_s) aligned windows; speed_rpm is the window mean
/// of the rpm channel when present.
std::vector<FleetWindow> make_windows(const FleetRecording& recording, double window_s);

/// truth reordered to the given machine ids; throws UnknownMachine.
std::vector<bool> align_truth(const std::vector<std::string>& machine_ids, const GroundTruth& truth);

struct WindowResult {
  std::size_t window_index = 0;
  /// Fewer than half of the machines survived preprocessing.
  bool skipped = false;
  /// Fleet indices of the machines present in matrix and dendrogram, in
  /// matrix order.
  std::vector<std::size_t> members;
  std::optional<DissimilarityMatrix> matrix;
  std::optional<Dendrogram> dendrogram;
  std::optional<Partition> partition;  // over matrix indices
  WindowVerdict verdict;               // over fleet indices
  /// Preprocessed signal per member (kept only on request).
  std::vector<Series> signals;
};

struct RunResult {
  VariantConfig config;
  std::vector<std::string> machine_ids;
  std::vector<WindowResult> windows;
  std::optional<std::vector<bool>> truth;
  std::optional<ConfusionCounts> counts;
  std::optional<Metrics> metrics;
  /// Metrics over config.thr_cc_grid, reusing every window's dendrogram.
  std::optional<SweepTable> thr_cc_sweep;
};

struct RunOptions {
  bool retain_signals = false;
};

/// Preprocess, compare, cluster, partition, score, classify and debounce
/// every window. Throws InvalidArgument for fewer than three machines.
RunResult run_variant(const FleetRecording& recording, const VariantConfig& config,
                      const std::optional<GroundTruth>& truth = std::nullopt, const RunOptions& options = {});

struct BaselineResult {
  BaselineConfig config;
  std::vector<std::string> machine_ids;
  std::size_t window_count = 0;
  SweepTable table;
};

/// Sigma-band detector over the harmonic indicator(s), debounced and
/// evaluated like the framework.
BaselineResult run_baseline(const FleetRecording& recording, const BaselineConfig& config, const GroundTruth& truth);

/// Matrices, dendrograms and partitions are included when requested.
nlohmann::json to_json(const RunResult& result, bool include_structures = false);
nlohmann::json to_json(const BaselineResult& result);
nlohmann::json to_json(const SweepTable& table);
nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const ConfusionCounts& counts);
nlohmann::json to_json(const DissimilarityMatrix& matrix);
nlohmann::json to_json(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_ids);

}  // namespace fleetmon
