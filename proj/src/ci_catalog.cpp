#include "structfid/ci_catalog.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "structfid/error.hpp"

namespace structfid {

std::size_t CiCatalog::count(CiKind kind) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(statements.begin(), statements.end(), [kind](const CiStatement& s) { return s.kind == kind; }));
}

namespace {

// Calls visit(subset) for every subset of `pool` with size <= max_size, by size.
template <typename Visit>
void for_each_subset(const std::vector<int>& pool, int max_size, Visit&& visit) {
  const int n = static_cast<int>(pool.size());
  std::vector<int> chosen;
  for (int size = 0; size <= std::min(max_size, n); ++size) {
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      chosen.clear();
      for (int i : idx) chosen.push_back(pool[i]);
      visit(chosen);
      int pos = size - 1;
      while (pos >= 0 && idx[pos] == n - size + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
}

}  // namespace

CiCatalog derive_ci_catalog(const CausalGraph& graph, const CatalogOptions& options) {
  const int n = graph.node_count();
  const int max_size = options.max_cond_size.value_or(n);
  if (max_size < 0) throw Error(ErrorCode::InvalidConfig, "max_cond_size must be non-negative");

  CiCatalog catalog;
  auto push = [&](CiStatement statement) {
    if (catalog.statements.size() >= options.statement_cap) {
      throw Error(ErrorCode::BudgetExceeded,
                  "catalog exceeds " + std::to_string(options.statement_cap) + " statements");
    }
    catalog.statements.push_back(std::move(statement));
  };

  std::vector<int> pool;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      pool.clear();
      for (int v = 0; v < n; ++v) {
        if (v != j && v != k) pool.push_back(v);
      }

      std::vector<NodeSet> separators;
      for_each_subset(pool, max_size, [&](const std::vector<int>& subset) {
        if (is_d_separated(graph, j, k, subset)) separators.push_back(subset);
      });
      const std::set<NodeSet> separator_lookup(separators.begin(), separators.end());

      std::set<NodeSet> connectors;
      for (const NodeSet& separator : separators) {
        push({j, k, separator, CiKind::Independent});
        for (std::size_t drop = 0; drop < separator.size(); ++drop) {
          NodeSet reduced = separator;
          reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(drop));
          // Every subset within the size cap was tested above, so membership
          // in the lookup is exactly the d-separation verdict.
          if (!separator_lookup.contains(reduced)) connectors.insert(std::move(reduced));
        }
      }
      for (const NodeSet& connector : connectors) push({j, k, connector, CiKind::Dependent});
    }
  }
  std::sort(catalog.statements.begin(), catalog.statements.end());
  return catalog;
}

CiCatalog local_filter(const CiCatalog& catalog, int target) {
  CiCatalog local;
  local.scope = CatalogScope::Local;
  local.target = target;
  for (const CiStatement& statement : catalog.statements) {
    if (statement.involves(target)) local.statements.push_back(statement);
  }
  return local;
}

}  // namespace structfid
