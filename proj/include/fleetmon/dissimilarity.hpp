#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fleetmon/signal.hpp"

namespace fleetmon {

/// How two m-dimensional points are compared.
///   diff_norm: ||x - y||_2 (default)
///   norm_diff: ||x||_2 - ||y||_2, the difference-of-norms form
enum class CostMode { diff_norm, norm_diff };

std::string to_string(CostMode mode);
CostMode cost_mode_from_string(const std::string& name);

double pointwise_cost(std::span<const double> x, std::span<const double> y,
                      CostMode mode = CostMode::diff_norm);

/// sqrt(sum_i cost(x_i, y_i)^2) over equally long series.
double euclidean(const Series& x, const Series& y, CostMode mode = CostMode::diff_norm);

/// 1-based index pair into (x, y).
struct PathStep {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct WarpingPath {
  std::vector<PathStep> steps;
  std::size_t psi = 0;
};

/// True when the path obeys the relaxed boundary, monotonicity and step-size
/// conditions for series of lengths n_x and n_y.
bool is_admissible(const WarpingPath& path, std::size_t n_x, std::size_t n_y);

struct DtwResult {
  double distance = 0.0;
  WarpingPath path;
};

/// Dynamic time warping whose path may start anywhere in the first psi + 1
/// points of either series and end anywhere in the last psi + 1 points.
/// psi == 0 is classic DTW. Among equal-cost paths the one built from
/// diagonal steps first, then (0,1), then (1,0) is returned.
DtwResult dtw(const Series& x, const Series& y, std::size_t psi,
              CostMode mode = CostMode::diff_norm);

/// Number of non-diagonal steps; divided by the path length when normalized.
double warping_amount(const WarpingPath& path, bool normalized);

struct HarmonicOptions {
  int k = 3;
  double half_window_hz = 5.0;
};

/// |harmonic(k, x) - harmonic(k, y)|, each side at its own estimated fundamental.
double harmonic_diff(const Series& x, const Series& y, const HarmonicOptions& options = {});

double feature_euclidean(std::span<const double> x, std::span<const double> y);

/// Symmetric N x N matrix of pairwise dissimilarities with a zero diagonal.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix(std::vector<std::string> machine_ids, std::vector<double> values,
                      std::string measure_tag);

  std::size_t size() const noexcept { return ids_.size(); }
  double at(std::size_t i, std::size_t j) const noexcept { return values_[i * ids_.size() + j]; }
  const std::vector<std::string>& machine_ids() const noexcept { return ids_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& measure_tag() const noexcept { return tag_; }

  /// Index of a machine id; throws UnknownMachine.
  std::size_t index_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::string tag_;
};

using Measure = std::function<double(const Series&, const Series&)>;

/// Evaluates the measure once per unordered pair. Pairs may be computed on
/// several threads; the result is identical to sequential evaluation.
DissimilarityMatrix build_matrix(const FleetWindow& window, const Measure& measure,
                                 const std::string& measure_tag);

}  // namespace fleetmon
