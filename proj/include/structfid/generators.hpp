#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "structfid/scm.hpp"
#include "structfid/table.hpp"

namespace structfid {

enum class GeneratorKind { Reference, Smote, MarginalIndependent, ScmOracle, NoisyCopy };

std::string_view to_string(GeneratorKind kind) noexcept;
GeneratorKind generator_kind_from_string(std::string_view name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Reference;
  std::string name;            // report identifier; defaults to the kind name
  int k = 5;                   // SMOTE neighbours
  double sigma = 0.0;          // NOISY_COPY noise level
  double size_fraction = 1.0;  // generated rows as a fraction of |ref|, in (0, 1] for REFERENCE
  std::shared_ptr<const ScmSpec> scm;  // SCM_ORACLE
  std::uint64_t seed = 0;

  /// Throws InvalidConfig, or MissingScm for SCM_ORACLE without a spec when
  /// require_scm is set.
  void validate(bool require_scm = true) const;
  std::string display_name() const { return name.empty() ? std::string(to_string(kind)) : name; }
};

/// n rows with ref's schema.
///   REFERENCE: the first n rows of ref (NotEnoughRows when n > |ref|).
///   SMOTE: per-class interpolation toward one of the k nearest same-class rows
///     in z-scored numerical space; categoricals come from the base row; class
///     counts are proportional to ref. Numerical targets form a single class.
///   MARGINAL_INDEPENDENT: every column resampled independently with replacement.
///   SCM_ORACLE: sample_scm on the attached spec (MissingScm without one).
///   NOISY_COPY: bootstrap rows, N(0, sigma^2) added to z-scored numericals,
///     categoricals redrawn uniformly with probability min(sigma, 1).
Table generate(const GeneratorSpec& spec, const Table& ref, std::int64_t n);

}  // namespace structfid
