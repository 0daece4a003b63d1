#include "fleetmon/detection.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "fleetmon/error.hpp"

namespace fleetmon {

std::vector<double> score(const Partition& partition, std::size_t machine_count) {
  std::vector<double> out(machine_count, 0.0);
  std::vector<bool> seen(machine_count, false);
  std::size_t covered = 0;
  for (const auto& cluster : partition.clusters) {
    for (std::size_t m : cluster) {
      if (m >= machine_count || seen[m]) {
        throw Error(ErrorCode::InvalidArgument, "partition is not a disjoint cover of the machines");
      }
      seen[m] = true;
      ++covered;
      out[m] = static_cast<double>(machine_count - cluster.size()) / static_cast<double>(machine_count);
    }
  }
  if (covered != machine_count) throw Error(ErrorCode::InvalidArgument, "partition does not cover every machine");
  return out;
}

std::vector<bool> classify(std::span<const double> scores, double thr_ad) {
  std::vector<bool> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > thr_ad;
  return out;
}

Debouncer::Debouncer(std::size_t machine_count, int n) : run_(machine_count, 0), n_(n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "debounce length must be >= 1");
}

std::vector<bool> Debouncer::update(const std::vector<std::optional<bool>>& instant) {
  if (instant.size() != run_.size()) throw Error(ErrorCode::LengthMismatch, "debounce machine count changed");
  std::vector<bool> out(run_.size());
  for (std::size_t m = 0; m < run_.size(); ++m) {
    run_[m] = (instant[m] && *instant[m]) ? run_[m] + 1 : 0;
    out[m] = run_[m] >= n_;
  }
  return out;
}

std::vector<std::vector<bool>> debounce(const std::vector<std::vector<std::optional<bool>>>& history, int n) {
  std::vector<std::vector<bool>> out;
  if (history.empty()) return out;
  Debouncer state(history.front().size(), n);
  out.reserve(history.size());
  for (const auto& window : history) out.push_back(state.update(window));
  return out;
}

SigmaBandResult sigma_band_baseline(const std::vector<std::vector<double>>& indicators, double sigma,
                                    const SigmaBandOptions& options) {
  const std::size_t n = indicators.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "the sigma band needs >= 2 machines");
  const std::size_t dims = indicators.front().size();
  for (const auto& row : indicators) {
    if (row.size() != dims) throw Error(ErrorCode::DimensionMismatch, "indicator dimensions differ");
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite indicator");
    }
  }

  SigmaBandResult result{std::vector<bool>(n, false), true};
  for (std::size_t d = 0; d < dims; ++d) {
    double total = 0.0;
    double total_sq = 0.0;
    for (const auto& row : indicators) {
      total += row[d];
      total_sq += row[d] * row[d];
    }
    for (std::size_t m = 0; m < n; ++m) {
      // Population moments over the fleet, optionally without machine m.
      const double count = options.leave_one_out ? static_cast<double>(n - 1) : static_cast<double>(n);
      double mean = (options.leave_one_out ? total - indicators[m][d] : total) / count;
      double ss = 0.0;
      for (std::size_t o = 0; o < n; ++o) {
        if (options.leave_one_out && o == m) continue;
        ss += (indicators[o][d] - mean) * (indicators[o][d] - mean);
      }
      const double sd = std::sqrt(ss / count);
      if (sd <= 1e-12 * std::sqrt(total_sq / static_cast<double>(n)) || sd == 0.0) continue;
      result.degenerate = false;
      if (std::abs(indicators[m][d] - mean) > sigma * sd) result.faulty[m] = true;
    }
  }
  return result;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

ConfusionCounts confusion(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction/truth length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) {
      truth[i] ? ++c.tp : ++c.fp;
    } else {
      truth[i] ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

Metrics metrics(const ConfusionCounts& counts) {
  Metrics m;
  const auto ratio = [&m](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(counts.tp, counts.tp + counts.fp);
  m.recall = ratio(counts.tp, counts.tp + counts.fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = f1_score(m.precision, m.recall);
  } else {
    m.degenerate = true;
  }
  return m;
}

std::size_t SweepTable::best_row() const {
  std::size_t best = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].metrics.f1 > rows[best].metrics.f1) best = r;
  }
  return best;
}

std::string SweepTable::render(const std::string& scenario_label) const {
  const int label_width = static_cast<int>(std::max<std::size_t>(scenario_label.size(), 9));
  std::string out = fmt::format("{:<{}}  {:<9}", "", label_width, parameter_name);
  for (const auto& row : rows) out += fmt::format(" {:>6}", fmt::format("{:g}", row.parameter));
  out += '\n';
  const char* names[] = {"Precision", "Recall", "F1"};
  for (int k = 0; k < 3; ++k) {
    out += fmt::format("{:<{}}  {:<9}", k == 0 ? scenario_label : "", label_width, names[k]);
    for (const auto& row : rows) {
      const double v = k == 0 ? row.metrics.precision : k == 1 ? row.metrics.recall : row.metrics.f1;
      out += fmt::format(" {:>6.3f}", v);
    }
    out += '\n';
  }
  return out;
}

SweepTable sweep(const std::string& parameter_name, const std::vector<double>& grid,
                 const std::vector<std::vector<std::vector<bool>>>& predictions,
                 const std::vector<bool>& truth, std::size_t warmup) {
  if (grid.size() != predictions.size()) throw Error(ErrorCode::LengthMismatch, "grid/prediction count mismatch");
  SweepTable table{parameter_name, {}};
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SweepRow row;
    row.parameter = grid[g];
    for (std::size_t w = warmup; w < predictions[g].size(); ++w) {
      row.counts += confusion(predictions[g][w], truth);
    }
    row.metrics = metrics(row.counts);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace fleetmon
