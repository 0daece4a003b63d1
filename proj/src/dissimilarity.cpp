#include "fleetmon/dissimilarity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                "point dimensions differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// Squared pointwise cost, computed without the intermediate sqrt for
// diff_norm so that integer inputs give exact sums.
class SquaredCost {
 public:
  SquaredCost(const Series& x, const Series& y, CostMode mode) : x_(x), y_(y), mode_(mode) {
    if (mode_ == CostMode::norm_diff) {
      x_norms_.resize(x.size());
      y_norms_.resize(y.size());
      for (std::size_t i = 0; i < x.size(); ++i) x_norms_[i] = norm2(x.point(i));
      for (std::size_t j = 0; j < y.size(); ++j) y_norms_[j] = norm2(y.point(j));
    }
  }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (mode_ == CostMode::norm_diff) {
      const double d = x_norms_[i] - y_norms_[j];
      return d * d;
    }
    const auto a = x_.point(i);
    const auto b = y_.point(j);
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }

 private:
  const Series& x_;
  const Series& y_;
  CostMode mode_;
  std::vector<double> x_norms_;
  std::vector<double> y_norms_;
};

enum Move : std::uint8_t { kStart = 0, kDiag = 1, kLeft = 2, kUp = 3 };

}  // namespace

std::string to_string(CostMode mode) {
  return mode == CostMode::diff_norm ? "diff_norm" : "norm_diff";
}

CostMode cost_mode_from_string(const std::string& name) {
  if (name == "diff_norm") return CostMode::diff_norm;
  if (name == "norm_diff") return CostMode::norm_diff;
  throw Error(ErrorCode::InvalidConfig, "unknown cost mode '" + name + "'");
}

double pointwise_cost(std::span<const double> x, std::span<const double> y, CostMode mode) {
  require_same_dim(x.size(), y.size());
  if (mode == CostMode::norm_diff) return norm2(x) - norm2(y);
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
  return std::sqrt(s);
}

double euclidean(const Series& x, const Series& y, CostMode mode) {
  require_same_dim(x.dim(), y.dim());
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "euclidean distance needs equally long series");
  }
  const SquaredCost cost(x, y, mode);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += cost(i, i);
  return std::sqrt(s);
}

bool is_admissible(const WarpingPath& path, std::size_t n_x, std::size_t n_y) {
  const auto& p = path.steps;
  if (p.empty()) return false;
  const std::size_t psi = path.psi;
  const PathStep first = p.front();
  const PathStep last = p.back();
  const bool start_ok = (first.j == 1 && first.i >= 1 && first.i <= psi + 1) ||
                        (first.i == 1 && first.j >= 1 && first.j <= psi + 1);
  const bool end_ok = (last.j == n_y && last.i + psi >= n_x && last.i <= n_x) ||
                      (last.i == n_x && last.j + psi >= n_y && last.j <= n_y);
  if (!start_ok || !end_ok) return false;
  for (std::size_t t = 1; t < p.size(); ++t) {
    if (p[t].i < p[t - 1].i || p[t].j < p[t - 1].j) return false;
    const std::size_t di = p[t].i - p[t - 1].i;
    const std::size_t dj = p[t].j - p[t - 1].j;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

DtwResult dtw(const Series& x, const Series& y, std::size_t psi, CostMode mode) {
  require_same_dim(x.dim(), y.dim());
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  if (psi >= nx || psi >= ny) {
    throw Error(ErrorCode::PsiTooLarge, "psi must be smaller than both series lengths");
  }
  const SquaredCost cost(x, y, mode);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<std::uint8_t> move(nx * ny);
  std::vector<double> prev(ny, kInf);
  std::vector<double> curr(ny, kInf);
  // Accumulated cost along the two relaxed end edges (last row / last column).
  std::vector<double> last_col(nx, kInf);
  std::vector<double> last_row;

  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double c = cost(i, j);
      const bool start = (j == 0 && i <= psi) || (i == 0 && j <= psi);
      double best;
      std::uint8_t how;
      if (start) {
        // A fresh start costs nothing extra and is never beaten.
        best = 0.0;
        how = kStart;
      } else {
        best = kInf;
        how = kDiag;
        if (i > 0 && j > 0) best = prev[j - 1];
        if (j > 0 && curr[j - 1] < best) {
          best = curr[j - 1];
          how = kLeft;
        }
        if (i > 0 && prev[j] < best) {
          best = prev[j];
          how = kUp;
        }
      }
      curr[j] = c + best;
      move[i * ny + j] = how;
    }
    last_col[i] = curr[ny - 1];
    std::swap(prev, curr);
  }
  last_row = prev;  // row nx - 1

  // End candidates: the corner first, then cells by distance from it,
  // the last column (x relaxed) before the last row (y relaxed).
  std::size_t end_i = nx - 1;
  std::size_t end_j = ny - 1;
  double best = last_row[ny - 1];
  for (std::size_t off = 1; off <= psi; ++off) {
    if (last_col[nx - 1 - off] < best) {
      best = last_col[nx - 1 - off];
      end_i = nx - 1 - off;
      end_j = ny - 1;
    }
    if (last_row[ny - 1 - off] < best) {
      best = last_row[ny - 1 - off];
      end_i = nx - 1;
      end_j = ny - 1 - off;
    }
  }

  WarpingPath path;
  path.psi = psi;
  std::size_t i = end_i;
  std::size_t j = end_j;
  while (true) {
    path.steps.push_back({i + 1, j + 1});
    const std::uint8_t how = move[i * ny + j];
    if (how == kStart) break;
    if (how == kDiag) {
      --i;
      --j;
    } else if (how == kLeft) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return DtwResult{std::sqrt(best), std::move(path)};
}

double warping_amount(const WarpingPath& path, bool normalized) {
  const auto& p = path.steps;
  std::size_t count = 0;
  for (std::size_t t = 1; t < p.size(); ++t) {
    if (!(p[t].i == p[t - 1].i + 1 && p[t].j == p[t - 1].j + 1)) ++count;
  }
  if (!normalized) return static_cast<double>(count);
  return p.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(p.size());
}

double harmonic_diff(const Series& x, const Series& y, const HarmonicOptions& options) {
  const auto indicator = [&](const Series& s) {
    const Spectrum spec = fft_magnitude(s);
    return harmonic_amplitude(spec, estimate_fundamental(spec), options.k, options.half_window_hz);
  };
  return std::abs(indicator(x) - indicator(y));
}

double feature_euclidean(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size());
  return pointwise_cost(x, y, CostMode::diff_norm);
}

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> machine_ids,
                                         std::vector<double> values, std::string measure_tag)
    : ids_(std::move(machine_ids)), values_(std::move(values)), tag_(std::move(measure_tag)) {
  const std::size_t n = ids_.size();
  if (values_.size() != n * n) {
    throw Error(ErrorCode::InvalidArgument, "matrix values do not match the machine count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (values_[i * n + i] != 0.0) throw Error(ErrorCode::InvalidArgument, "matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = values_[i * n + j];
      if (!std::isfinite(v) || v < 0.0 || v != values_[j * n + i]) {
        throw Error(ErrorCode::InvalidArgument, "matrix must be finite, non-negative and symmetric");
      }
    }
  }
}

std::size_t DissimilarityMatrix::index_of(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw Error(ErrorCode::UnknownMachine, "unknown machine '" + id + "'");
  return static_cast<std::size_t>(it - ids_.begin());
}

DissimilarityMatrix build_matrix(const FleetWindow& window, const Measure& measure,
                                 const std::string& measure_tag) {
  window.validate();
  const std::size_t n = window.series.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }

  std::vector<double> values(n * n, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      const auto [i, j] = pairs[k];
      try {
        const double v = measure(window.series[i], window.series[j]);
        values[i * n + j] = v;
        values[j * n + i] = v;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = pairs.size();
      }
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), pairs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return DissimilarityMatrix(window.machine_ids, std::move(values), measure_tag);
}

}  // namespace fleetmon
