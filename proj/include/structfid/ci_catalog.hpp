#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "structfid/graph.hpp"

namespace structfid {

enum class CiKind { Independent, Dependent };

struct CiStatement {
  int j = 0;  // j < k
  int k = 0;
  NodeSet conditioning_set;
  CiKind kind = CiKind::Independent;

  // pair-lexicographic, then set-lexicographic, Independent before Dependent
  friend auto operator<=>(const CiStatement&, const CiStatement&) = default;
  friend bool operator==(const CiStatement&, const CiStatement&) = default;

  bool involves(int node) const noexcept { return j == node || k == node; }
};

enum class CatalogScope { Global, Local };

struct CiCatalog {
  std::vector<CiStatement> statements;
  CatalogScope scope = CatalogScope::Global;
  int target = -1;  // set for Local scope

  std::size_t size() const noexcept { return statements.size(); }
  bool empty() const noexcept { return statements.empty(); }
  std::size_t count(CiKind kind) const noexcept;

  friend bool operator==(const CiCatalog&, const CiCatalog&) = default;
};

inline constexpr std::size_t kDefaultStatementCap = 1'000'000;

struct CatalogOptions {
  std::optional<int> max_cond_size;  // no cap when empty
  std::size_t statement_cap = kDefaultStatementCap;
};

/// Enumerates every separator S of every unordered pair (subject to
/// max_cond_size) and, for each v in S, records S \ {v} as a dependence
/// statement when it fails to separate the pair. The result is deduplicated
/// and sorted. Throws BudgetExceeded past the statement cap.
CiCatalog derive_ci_catalog(const CausalGraph& graph, const CatalogOptions& options = {});

/// Statements whose pair contains `target`, order preserved.
CiCatalog local_filter(const CiCatalog& catalog, int target);

}  // namespace structfid
