#include "structfid/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

#include "structfid/error.hpp"

namespace structfid {

namespace {

void check_parent_lists(const std::vector<std::vector<int>>& parents) {
  const int n = static_cast<int>(parents.size());
  for (int child = 0; child < n; ++child) {
    const auto& list = parents[child];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const int p = list[i];
      if (p < 0 || p >= n) {
        throw Error(ErrorCode::InvalidNode, "parent index " + std::to_string(p) + " out of range");
      }
      if (p == child) throw Error(ErrorCode::InvalidSpec, "self-loop on node " + std::to_string(child));
      if (i > 0 && list[i - 1] == p) {
        throw Error(ErrorCode::InvalidSpec, "duplicate edge " + std::to_string(p) + "->" + std::to_string(child));
      }
    }
  }
}

}  // namespace

CausalGraph::CausalGraph(std::vector<std::vector<int>> parents) : parents_(std::move(parents)) {
  const std::size_t n = parents_.size();
  for (auto& list : parents_) std::sort(list.begin(), list.end());
  check_parent_lists(parents_);
  const std::vector<int> order = topological_order(parents_);

  children_.assign(n, {});
  for (std::size_t child = 0; child < n; ++child) {
    for (int p : parents_[child]) children_[p].push_back(static_cast<int>(child));
  }

  // Reverse topological sweep: desc(v) = {v} ∪ ⋃ desc(children).
  descendants_.assign(n * n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = static_cast<std::size_t>(*it);
    char* row = descendants_.data() + v * n;
    row[v] = 1;
    for (int c : children_[v]) {
      const char* child_row = descendants_.data() + static_cast<std::size_t>(c) * n;
      for (std::size_t d = 0; d < n; ++d) row[d] |= child_row[d];
    }
  }
}

CausalGraph CausalGraph::from_parents(std::vector<std::vector<int>> parents) {
  return CausalGraph(std::move(parents));
}

CausalGraph CausalGraph::from_edges(int node_count, std::span<const std::pair<int, int>> edges) {
  if (node_count < 0) throw Error(ErrorCode::InvalidNode, "negative node count");
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(node_count));
  for (const auto& [parent, child] : edges) {
    if (parent < 0 || parent >= node_count || child < 0 || child >= node_count) {
      throw Error(ErrorCode::InvalidNode,
                  "edge " + std::to_string(parent) + "->" + std::to_string(child) + " out of range");
    }
    parents[child].push_back(parent);
  }
  return CausalGraph(std::move(parents));
}

std::vector<std::pair<int, int>> CausalGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int child = 0; child < node_count(); ++child) {
    for (int p : parents_[child]) out.emplace_back(p, child);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CausalGraph::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& list : parents_) total += list.size();
  return total;
}

CausalGraph CausalGraph::relabeled(std::span<const int> permutation) const {
  const int n = node_count();
  if (static_cast<int>(permutation.size()) != n) throw Error(ErrorCode::InvalidNode, "permutation size mismatch");
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(n));
  for (int child = 0; child < n; ++child) {
    for (int p : parents_[child]) parents[permutation[child]].push_back(permutation[p]);
  }
  return CausalGraph(std::move(parents));
}

std::vector<int> topological_order(std::span<const std::vector<int>> parents) {
  const int n = static_cast<int>(parents.size());
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int child = 0; child < n; ++child) {
    for (int p : parents[child]) {
      if (p < 0 || p >= n) throw Error(ErrorCode::InvalidNode, "parent index " + std::to_string(p) + " out of range");
      children[p].push_back(child);
      ++indegree[child];
    }
  }

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) != n) throw Error(ErrorCode::CycleDetected, "graph contains a directed cycle");
  return order;
}

std::vector<int> topological_order(const CausalGraph& graph) { return topological_order(graph.parent_lists()); }

bool is_d_separated(const CausalGraph& graph, int j, int k, std::span<const int> s) {
  const int n = graph.node_count();
  auto valid = [n](int v) { return v >= 0 && v < n; };
  if (!valid(j) || !valid(k)) throw Error(ErrorCode::InvalidNode, "endpoint out of range");
  if (j == k) throw Error(ErrorCode::InvalidNode, "endpoints must differ");

  std::vector<char> observed(static_cast<std::size_t>(n), 0);
  for (int v : s) {
    if (!valid(v)) throw Error(ErrorCode::InvalidNode, "conditioning node " + std::to_string(v) + " out of range");
    if (v == j || v == k) throw Error(ErrorCode::OverlappingSet, "conditioning set contains an endpoint");
    observed[v] = 1;
  }
  // A collider is open iff it or one of its descendants is observed.
  std::vector<char> opens_collider(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    for (int z : s) {
      if (graph.is_descendant(z, v)) {
        opens_collider[v] = 1;
        break;
      }
    }
  }

  // State (node, arrived_from_child). Entering from a child travels "up".
  std::vector<char> visited(static_cast<std::size_t>(2 * n), 0);
  std::vector<std::pair<int, bool>> stack{{j, true}};
  while (!stack.empty()) {
    const auto [v, from_child] = stack.back();
    stack.pop_back();
    const std::size_t key = static_cast<std::size_t>(2 * v + (from_child ? 1 : 0));
    if (visited[key]) continue;
    visited[key] = 1;
    if (v == k) return false;

    if (from_child) {
      if (observed[v]) continue;
      for (int p : graph.parents(v)) stack.emplace_back(p, true);
      for (int c : graph.children(v)) stack.emplace_back(c, false);
    } else {
      if (!observed[v]) {
        for (int c : graph.children(v)) stack.emplace_back(c, false);
      }
      if (opens_collider[v]) {
        for (int p : graph.parents(v)) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

}  // namespace structfid
