#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetmon/clustering.hpp"

namespace fleetmon {

inline constexpr double kDefaultAnomalyThreshold = 2.0 / 3.0;

/// Verdict for one machine in one window. Excluded machines (preprocessing
/// failed) carry no score and cluster -1.
struct MachineVerdict {
  bool included = true;
  double score = 0.0;
  int cluster = -1;
  bool instant_anomalous = false;
  bool debounced_faulty = false;
};

struct WindowVerdict {
  std::size_t window_index = 0;
  std::vector<MachineVerdict> machines;
};

/// (N - |own cluster|) / N per machine index in [0, machine_count).
std::vector<double> score(const Partition& partition, std::size_t machine_count);

/// score > thr_ad, strictly.
std::vector<bool> classify(std::span<const double> scores, double thr_ad = kDefaultAnomalyThreshold);

/// Per-machine run-length counter: faulty once a machine has been anomalous
/// in the last n consecutive windows. A missing observation (excluded
/// machine) resets the count.
class Debouncer {
 public:
  Debouncer(std::size_t machine_count, int n);

  std::vector<bool> update(const std::vector<std::optional<bool>>& instant);

 private:
  std::vector<int> run_;
  int n_;
};

/// history[window][machine] -> faulty[window][machine].
std::vector<std::vector<bool>> debounce(const std::vector<std::vector<std::optional<bool>>>& history, int n = 5);

struct SigmaBandOptions {
  bool leave_one_out = false;
};

struct SigmaBandResult {
  std::vector<bool> faulty;
  /// Every indicator dimension had zero spread; all machines are healthy.
  bool degenerate = false;
};

/// indicators[machine][dimension]. A machine is faulty when any dimension
/// lies more than sigma population standard deviations from the fleet mean.
SigmaBandResult sigma_band_baseline(const std::vector<std::vector<double>>& indicators, double sigma,
                                    const SigmaBandOptions& options = {});

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const std::vector<bool>& predicted, const std::vector<bool>& truth);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when any ratio was 0/0 and reported as 0.
  bool degenerate = false;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

Metrics metrics(const ConfusionCounts& counts);

struct SweepRow {
  double parameter = 0.0;
  ConfusionCounts counts;
  Metrics metrics;
};

struct SweepTable {
  std::string parameter_name;
  std::vector<SweepRow> rows;

  /// Index of the row with the highest F1 (first on ties).
  std::size_t best_row() const;

  /// Aligned text: one column per parameter value, rows Precision/Recall/F1.
  std::string render(const std::string& scenario_label) const;
};

/// predictions[grid value][window][machine], truth[machine]. The first
/// warmup windows are left out of the counts.
SweepTable sweep(const std::string& parameter_name, const std::vector<double>& grid,
                 const std::vector<std::vector<std::vector<bool>>>& predictions,
                 const std::vector<bool>& truth, std::size_t warmup);

inline const std::vector<double>& default_thr_cc_grid() {
  static const std::vector<double> grid{0.5, 0.7, 0.8, 0.85, 0.9, 0.95};
  return grid;
}

inline const std::vector<double>& default_sigma_grid() {
  static const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  return grid;
}

}  // namespace fleetmon
