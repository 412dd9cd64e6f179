#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "structfid/graph.hpp"
#include "structfid/table.hpp"

namespace structfid {

inline constexpr std::int64_t kDefaultFullSampleSize = 100'000;

/// One CPT row per configuration of the categorical parents (ascending node
/// index, last parent varying fastest); each row is a distribution over the
/// node's categories.
struct CategoricalMechanism {
  std::vector<std::vector<double>> cpt;
  friend bool operator==(const CategoricalMechanism&, const CategoricalMechanism&) = default;
};

enum class Nonlinearity { Identity, Tanh };

/// x = g(intercept + sum_p weight_p * x_p + offset[config]) + N(0, noise_std^2)
/// where p ranges over numerical parents (ascending) and config indexes the
/// categorical-parent configuration as in CategoricalMechanism.
struct NumericalMechanism {
  double intercept = 0.0;
  std::vector<double> weights;
  std::vector<double> offsets;
  double noise_std = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::Identity;
  friend bool operator==(const NumericalMechanism&, const NumericalMechanism&) = default;
};

using Mechanism = std::variant<CategoricalMechanism, NumericalMechanism>;

struct ScmSpec {
  CausalGraph graph;
  std::vector<Column> variables;
  std::vector<Mechanism> mechanisms;
  int target_index = -1;

  int node_count() const noexcept { return static_cast<int>(variables.size()); }
  Schema schema() const;
  std::vector<int> categorical_parents(int node) const;
  std::vector<int> numerical_parents(int node) const;
  /// Number of categorical-parent configurations of `node`.
  std::size_t configuration_count(int node) const;

  /// Throws InvalidSpec on any violated invariant (categorical nodes with
  /// numerical parents, CPT shape, simplex rows within 1e-9, non-positive
  /// noise, non-finite weights).
  void validate() const;

  friend bool operator==(const ScmSpec&, const ScmSpec&) = default;
};

/// Forward-samples n rows, visiting nodes in topological order per row.
/// Identical (spec, n, seed) yields bit-identical tables.
Table sample_scm(const ScmSpec& spec, std::int64_t n, std::uint64_t seed);

ScmSpec scm_from_json(std::string_view text);
std::string scm_to_json(const ScmSpec& spec);
ScmSpec load_scm(const std::filesystem::path& path);

}  // namespace structfid
