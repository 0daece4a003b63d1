#include "fleetmon/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

// Leaf machine indices below a node, in tree order.
void collect_leaves(const std::vector<Dendrogram::Node>& nodes, int node, std::vector<std::size_t>& out) {
  const auto& n = nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    out.push_back(n.leaf);
    return;
  }
  collect_leaves(nodes, n.left, out);
  collect_leaves(nodes, n.right, out);
}

double lance_williams(Linkage linkage, double d_ik, double d_jk, double d_ij, double n_i, double n_j,
                      double n_k) {
  switch (linkage) {
    case Linkage::single: return std::min(d_ik, d_jk);
    case Linkage::complete: return std::max(d_ik, d_jk);
    case Linkage::average: return (n_i * d_ik + n_j * d_jk) / (n_i + n_j);
    case Linkage::ward: {
      const double sq = ((n_i + n_k) * d_ik * d_ik + (n_j + n_k) * d_jk * d_jk - n_k * d_ij * d_ij) /
                        (n_i + n_j + n_k);
      return std::sqrt(std::max(0.0, sq));
    }
  }
  return std::min(d_ik, d_jk);
}

bool near_zero_variance(double sum_sq_dev, double sum_sq) {
  return sum_sq_dev <= 1e-20 * sum_sq || sum_sq_dev == 0.0;
}

}  // namespace

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::ward: return "ward";
  }
  return "single";
}

Linkage linkage_from_string(const std::string& name) {
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average") return Linkage::average;
  if (name == "ward") return Linkage::ward;
  throw Error(ErrorCode::InvalidConfig, "unknown linkage '" + name + "'");
}

Dendrogram::Dendrogram(std::vector<Node> nodes, Linkage linkage)
    : nodes_(std::move(nodes)), linkage_(linkage) {
  leaf_count_ = static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
  if (leaf_count_ == 0 || nodes_.size() != 2 * leaf_count_ - 1) {
    throw Error(ErrorCode::InvalidArgument, "a dendrogram over L leaves needs 2L - 1 nodes");
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& n = nodes_[k];
    if (k < leaf_count_ ? !n.is_leaf() : n.is_leaf()) {
      throw Error(ErrorCode::InvalidArgument, "leaves must precede merges");
    }
    if (!n.is_leaf() && (n.left >= static_cast<int>(k) || n.right >= static_cast<int>(k))) {
      throw Error(ErrorCode::InvalidArgument, "merge children must precede the merge");
    }
  }
}

std::vector<std::size_t> Dendrogram::leaves() const {
  std::vector<std::size_t> out;
  out.reserve(leaf_count_);
  for (std::size_t k = 0; k < leaf_count_; ++k) out.push_back(nodes_[k].leaf);
  std::sort(out.begin(), out.end());
  return out;
}

Dendrogram Dendrogram::subtree(int node) const {
  // Mark reachable nodes, then renumber: leaves first, merges in original order.
  std::vector<bool> keep(nodes_.size(), false);
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    keep[static_cast<std::size_t>(k)] = true;
    const Node& n = nodes_[static_cast<std::size_t>(k)];
    if (!n.is_leaf()) {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  std::vector<int> remap(nodes_.size(), -1);
  std::vector<Node> out;
  std::vector<std::size_t> leaf_nodes;
  for (std::size_t k = 0; k < leaf_count_; ++k) {
    if (keep[k]) leaf_nodes.push_back(k);
  }
  std::sort(leaf_nodes.begin(), leaf_nodes.end(),
            [&](std::size_t a, std::size_t b) { return nodes_[a].leaf < nodes_[b].leaf; });
  for (std::size_t k : leaf_nodes) {
    remap[k] = static_cast<int>(out.size());
    out.push_back(nodes_[k]);
  }
  for (std::size_t k = leaf_count_; k < nodes_.size(); ++k) {
    if (!keep[k]) continue;
    Node n = nodes_[k];
    n.left = remap[static_cast<std::size_t>(n.left)];
    n.right = remap[static_cast<std::size_t>(n.right)];
    remap[k] = static_cast<int>(out.size());
    out.push_back(n);
  }
  return Dendrogram(std::move(out), linkage_);
}

std::vector<int> Partition::assignment(std::size_t machine_count) const {
  std::vector<int> out(machine_count, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (std::size_t m : clusters[c]) {
      if (m < machine_count) out[m] = static_cast<int>(c);
    }
  }
  return out;
}

Dendrogram agglomerate(const DissimilarityMatrix& matrix, Linkage linkage) {
  const std::size_t n = matrix.size();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "cannot cluster an empty matrix");

  std::vector<Dendrogram::Node> nodes;
  nodes.reserve(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    Dendrogram::Node leaf;
    leaf.leaf = i;
    leaf.min_leaf = i;
    nodes.push_back(leaf);
  }

  // Active clusters are kept sorted by their smallest member, which is their id.
  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<double> dist(matrix.values());  // indexed by slot of the original leaves
  std::vector<std::size_t> slot(n);           // active position -> distance-matrix slot
  std::iota(slot.begin(), slot.end(), 0);
  const auto d = [&](std::size_t a, std::size_t b) -> double& { return dist[slot[a] * n + slot[b]]; };

  while (active.size() > 1) {
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if (d(a, b) < best) {
          best = d(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }

    const auto& na = nodes[static_cast<std::size_t>(active[best_a])];
    const auto& nb = nodes[static_cast<std::size_t>(active[best_b])];
    const double size_a = static_cast<double>(na.size);
    const double size_b = static_cast<double>(nb.size);
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == best_a || k == best_b) continue;
      const double size_k = static_cast<double>(nodes[static_cast<std::size_t>(active[k])].size);
      const double updated = lance_williams(linkage, d(best_a, k), d(best_b, k), best, size_a, size_b, size_k);
      d(best_a, k) = updated;
      d(k, best_a) = updated;
    }

    Dendrogram::Node merged;
    merged.left = active[best_a];
    merged.right = active[best_b];
    merged.height = best;
    merged.min_leaf = std::min(na.min_leaf, nb.min_leaf);
    merged.size = na.size + nb.size;
    nodes.push_back(merged);

    // The merged cluster keeps slot a; its id (min member) is a's, so the order holds.
    active[best_a] = static_cast<int>(nodes.size() - 1);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return Dendrogram(std::move(nodes), linkage);
}

double dendrogrammic_distance(const Dendrogram& dendrogram, std::size_t x, std::size_t y) {
  const auto& nodes = dendrogram.nodes();
  std::vector<int> parent(nodes.size(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (!nodes[k].is_leaf()) {
      parent[static_cast<std::size_t>(nodes[k].left)] = static_cast<int>(k);
      parent[static_cast<std::size_t>(nodes[k].right)] = static_cast<int>(k);
    }
  }
  const auto find_leaf = [&](std::size_t machine) {
    for (std::size_t k = 0; k < dendrogram.leaf_count(); ++k) {
      if (nodes[k].leaf == machine) return static_cast<int>(k);
    }
    throw Error(ErrorCode::UnknownMachine, "machine " + std::to_string(machine) + " is not a leaf");
  };
  const int nx = find_leaf(x);
  const int ny = find_leaf(y);
  if (nx == ny) return 0.0;
  std::vector<bool> above_x(nodes.size(), false);
  for (int k = nx; k >= 0; k = parent[static_cast<std::size_t>(k)]) above_x[static_cast<std::size_t>(k)] = true;
  int k = ny;
  while (!above_x[static_cast<std::size_t>(k)]) k = parent[static_cast<std::size_t>(k)];
  return nodes[static_cast<std::size_t>(k)].height;
}

std::vector<double> cophenetic_matrix(const Dendrogram& dendrogram) {
  const auto leaves = dendrogram.leaves();
  const std::size_t n = leaves.size();
  const auto pos = [&](std::size_t machine) {
    return static_cast<std::size_t>(std::lower_bound(leaves.begin(), leaves.end(), machine) - leaves.begin());
  };
  std::vector<double> out(n * n, 0.0);
  const auto& nodes = dendrogram.nodes();
  for (std::size_t k = dendrogram.leaf_count(); k < nodes.size(); ++k) {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    collect_leaves(nodes, nodes[k].left, left);
    collect_leaves(nodes, nodes[k].right, right);
    for (std::size_t a : left) {
      for (std::size_t b : right) {
        out[pos(a) * n + pos(b)] = nodes[k].height;
        out[pos(b) * n + pos(a)] = nodes[k].height;
      }
    }
  }
  return out;
}

double cophenetic_correlation(const DissimilarityMatrix& matrix, const Dendrogram& dendrogram) {
  const auto leaves = dendrogram.leaves();
  const std::size_t n = leaves.size();
  if (n < 3) throw Error(ErrorCode::UndefinedCorrelation, "fewer than two machine pairs");
  for (std::size_t leaf : leaves) {
    if (leaf >= matrix.size()) throw Error(ErrorCode::UnknownMachine, "dendrogram leaf outside the matrix");
  }
  const auto coph = cophenetic_matrix(dendrogram);

  std::vector<double> s;
  std::vector<double> t;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      s.push_back(matrix.at(leaves[a], leaves[b]));
      t.push_back(coph[a * n + b]);
    }
  }
  const double count = static_cast<double>(s.size());
  const double s_mean = std::accumulate(s.begin(), s.end(), 0.0) / count;
  const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / count;
  double cross = 0.0;
  double ss = 0.0;
  double tt = 0.0;
  double s_sq = 0.0;
  double t_sq = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double ds = s[p] - s_mean;
    const double dt = t[p] - t_mean;
    cross += ds * dt;
    ss += ds * ds;
    tt += dt * dt;
    s_sq += s[p] * s[p];
    t_sq += t[p] * t[p];
  }
  if (near_zero_variance(ss, s_sq) || near_zero_variance(tt, t_sq)) {
    throw Error(ErrorCode::UndefinedCorrelation, "zero variance in pairwise or dendrogrammic distances");
  }
  return std::clamp(cross / std::sqrt(ss * tt), -1.0, 1.0);
}

std::pair<Dendrogram, Dendrogram> cut_at_highest_level(const Dendrogram& dendrogram) {
  if (dendrogram.leaf_count() < 2) throw Error(ErrorCode::SingleLeaf, "cannot cut a single leaf");
  const auto& root = dendrogram.root();
  return {dendrogram.subtree(root.left), dendrogram.subtree(root.right)};
}

Partition partition(const Dendrogram& dendrogram, const DissimilarityMatrix& matrix, double thr_cc) {
  Partition out;
  const auto recurse = [&](const auto& self, const Dendrogram& d) -> void {
    bool split = false;
    if (d.leaf_count() >= 2) {
      try {
        split = cophenetic_correlation(matrix, d) > thr_cc;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedCorrelation) throw;
      }
    }
    if (!split) {
      out.clusters.push_back(d.leaves());
      return;
    }
    const auto [left, right] = cut_at_highest_level(d);
    self(self, left);
    self(self, right);
  };
  recurse(recurse, dendrogram);
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace fleetmon
