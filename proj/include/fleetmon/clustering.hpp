#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fleetmon/dissimilarity.hpp"

namespace fleetmon {

enum class Linkage { single, complete, average, ward };

std::string to_string(Linkage linkage);
Linkage linkage_from_string(const std::string& name);

/// Binary merge tree over machine indices of a DissimilarityMatrix.
///
/// Nodes [0, leaf_count) are leaves; every following node is a merge of two
/// earlier nodes, and the last node is the root. A merge node's left child
/// is the one holding the smaller machine index.
class Dendrogram {
 public:
  struct Node {
    int left = -1;
    int right = -1;
    std::size_t leaf = 0;      // machine index, leaves only
    double height = 0.0;       // linkage distance, merges only
    std::size_t min_leaf = 0;  // smallest machine index below this node
    std::size_t size = 1;
    bool is_leaf() const noexcept { return left < 0; }
  };

  Dendrogram(std::vector<Node> nodes, Linkage linkage);

  std::size_t leaf_count() const noexcept { return leaf_count_; }
  std::size_t merge_count() const noexcept { return nodes_.size() - leaf_count_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const noexcept { return nodes_.back(); }
  Linkage linkage() const noexcept { return linkage_; }

  /// Machine indices of the leaves, ascending.
  std::vector<std::size_t> leaves() const;

  /// Copy of the subtree rooted at node, renumbered.
  Dendrogram subtree(int node) const;

 private:
  std::vector<Node> nodes_;
  std::size_t leaf_count_ = 0;
  Linkage linkage_;
};

/// Disjoint clusters of machine indices covering every leaf. Members are
/// ascending and clusters are ordered by their smallest member.
struct Partition {
  std::vector<std::vector<std::size_t>> clusters;

  /// cluster_of[machine] for machines [0, machine_count); -1 when absent.
  std::vector<int> assignment(std::size_t machine_count) const;
};

/// Agglomerative clustering with Lance-Williams updates. Equal-distance
/// candidates are resolved by the lexicographically smallest pair of
/// cluster ids, a cluster's id being its smallest member.
Dendrogram agglomerate(const DissimilarityMatrix& matrix, Linkage linkage = Linkage::single);

/// Height of the lowest merge joining x and y (0 when x == y). Throws
/// UnknownMachine when either index is not a leaf.
double dendrogrammic_distance(const Dendrogram& dendrogram, std::size_t x, std::size_t y);

/// Row-major leaf_count x leaf_count matrix of dendrogrammic distances,
/// indexed in the order of Dendrogram::leaves().
std::vector<double> cophenetic_matrix(const Dendrogram& dendrogram);

/// Pearson correlation between matrix distances and dendrogrammic distances
/// over all pairs of the dendrogram's leaves. Throws UndefinedCorrelation for
/// fewer than two pairs or zero variance on either side.
double cophenetic_correlation(const DissimilarityMatrix& matrix, const Dendrogram& dendrogram);

/// The two subtrees below the root; throws SingleLeaf for a lone leaf.
std::pair<Dendrogram, Dendrogram> cut_at_highest_level(const Dendrogram& dendrogram);

/// Recursively splits at the root while the cophenetic correlation of the
/// current subtree (against the matrix restricted to its leaves) is strictly
/// above thr_cc. An undefined correlation stops the recursion.
Partition partition(const Dendrogram& dendrogram, const DissimilarityMatrix& matrix, double thr_cc);

}  // namespace fleetmon
