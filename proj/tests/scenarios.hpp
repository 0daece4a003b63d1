#pragma once

// Shared test inputs: small matrices, random point clouds and fleet configs.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fleetmon/clustering.hpp"
#include "fleetmon/dissimilarity.hpp"
#include "fleetmon/fleetsim.hpp"

namespace scenarios {

inline std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("m" + std::to_string(i));
  return out;
}

inline fleetmon::DissimilarityMatrix euclidean_matrix(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      v[i * n + j] = std::sqrt(s);
    }
  }
  return {ids(n), v, "euclidean"};
}

inline fleetmon::DissimilarityMatrix line_matrix(const std::vector<double>& positions) {
  std::vector<std::vector<double>> pts;
  for (double p : positions) pts.push_back({p});
  return euclidean_matrix(pts);
}

/// Distances read off a random binary tree with increasing merge heights.
inline fleetmon::DissimilarityMatrix random_ultrametric(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
  std::vector<double> v(n * n, 0.0);
  double height = 0.0;
  std::uniform_real_distribution<double> step(0.1, 2.0);
  while (groups.size() > 1) {
    height += step(rng);
    const std::size_t a = rng() % groups.size();
    std::size_t b = rng() % (groups.size() - 1);
    if (b >= a) ++b;
    for (auto i : groups[a]) {
      for (auto j : groups[b]) v[i * n + j] = v[j * n + i] = height;
    }
    groups[a].insert(groups[a].end(), groups[b].begin(), groups[b].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return {ids(n), v, "ultrametric"};
}

/// Ten unevenly spaced points on a line, optionally followed by three points
/// far away from the chain.
inline std::vector<double> chain_positions(bool with_group) {
  std::vector<double> p{0.0, 1.0, 1.7, 2.9, 3.6, 4.9, 5.5, 6.8, 7.4, 8.6};
  if (with_group) p.insert(p.end(), {30.0, 30.8, 32.0});
  return p;
}

struct TwoBlobs {
  fleetmon::DissimilarityMatrix matrix;
  std::vector<std::size_t> blob_a;  // the blob holding machine 0
  std::vector<std::size_t> blob_b;
};

inline constexpr std::size_t kBlobDims = 12;

/// Two clouds drawn uniformly from 12-D balls of diameter 1 whose centres
/// are 11 apart, so intra distances are at most 1 and inter distances at
/// least 10. Machine order is shuffled.
inline TwoBlobs two_blobs(std::mt19937_64& rng, std::size_t na, std::size_t nb) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto draw = [&](double offset) {
    std::vector<double> p(kBlobDims);
    double norm = 0.0;
    for (double& v : p) {
      v = g(rng);
      norm += v * v;
    }
    const double r = 0.5 * std::pow(u(rng), 1.0 / static_cast<double>(kBlobDims)) / std::sqrt(norm);
    for (double& v : p) v *= r;
    p[0] += offset;
    return p;
  };
  const std::size_t n = na + nb;
  std::vector<std::size_t> slot(n);
  std::iota(slot.begin(), slot.end(), 0);
  std::shuffle(slot.begin(), slot.end(), rng);
  std::vector<std::vector<double>> pts(n);
  std::vector<std::size_t> a, b;
  for (std::size_t k = 0; k < n; ++k) {
    const bool first = k < na;
    pts[slot[k]] = draw(first ? 0.0 : 11.0);
    (first ? a : b).push_back(slot[k]);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (b.front() < a.front()) std::swap(a, b);
  return {euclidean_matrix(pts), a, b};
}

inline bool is_disjoint_cover(const fleetmon::Partition& p, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& c : p.clusters) {
    if (c.empty()) return false;
    for (auto i : c) {
      if (i >= n) return false;
      ++seen[i];
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

/// Default fleet with a wide spread of healthy amplitudes, wide enough to
/// swamp the fault's effect on a per-machine amplitude indicator.
inline fleetmon::ScenarioConfig amplitude_confounded() {
  fleetmon::ScenarioConfig c;
  c.amplitude_spread = 0.8;
  c.seed = 1;
  return c;
}

inline fleetmon::ScenarioConfig stationary(double rpm) {
  fleetmon::ScenarioConfig c;
  c.speed = fleetmon::StationaryProfile{rpm};
  return c;
}

}  // namespace scenarios
