#pragma once

#include <span>
#include <utility>
#include <vector>

namespace structfid {

using NodeSet = std::vector<int>;  // sorted, duplicate-free node indices

/// Directed acyclic graph over variable indices [0, node_count).
///
/// Parent lists are kept sorted. Reflexive descendant sets are computed once at
/// construction; the collider rule of d-separation reads them.
class CausalGraph {
 public:
  CausalGraph() = default;

  /// Validates indices, rejects self-loops, duplicate edges and cycles.
  static CausalGraph from_edges(int node_count, std::span<const std::pair<int, int>> edges);
  static CausalGraph from_parents(std::vector<std::vector<int>> parents);

  int node_count() const noexcept { return static_cast<int>(parents_.size()); }
  const std::vector<int>& parents(int node) const { return parents_.at(node); }
  const std::vector<int>& children(int node) const { return children_.at(node); }
  const std::vector<std::vector<int>>& parent_lists() const noexcept { return parents_; }

  /// True when `descendant` is `node` or reachable from it along directed edges.
  bool is_descendant(int descendant, int node) const {
    return descendants_[static_cast<std::size_t>(node) * parents_.size() + descendant] != 0;
  }

  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const noexcept;

  /// Same graph with node i renamed to permutation[i].
  CausalGraph relabeled(std::span<const int> permutation) const;

  friend bool operator==(const CausalGraph& a, const CausalGraph& b) { return a.parents_ == b.parents_; }

 private:
  explicit CausalGraph(std::vector<std::vector<int>> parents);

  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<char> descendants_;  // row-major [node][descendant]
};

/// Kahn's algorithm with a min-heap frontier, so ties resolve to the smallest index.
/// Throws CycleDetected.
std::vector<int> topological_order(std::span<const std::vector<int>> parents);
std::vector<int> topological_order(const CausalGraph& graph);

/// d-separation of j and k given s, decided by a Bayes-ball reachability sweep.
/// Throws InvalidNode for out-of-range or equal endpoints and OverlappingSet when s
/// contains j or k.
bool is_d_separated(const CausalGraph& graph, int j, int k, std::span<const int> s);

}  // namespace structfid
