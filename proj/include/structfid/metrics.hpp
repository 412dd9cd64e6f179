#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structfid/error.hpp"
#include "structfid/stats.hpp"
#include "structfid/table.hpp"

namespace structfid {

// Fidelity --------------------------------------------------------------------

/// Mean over columns of 1 - KS (numerical) or 1 - TVD of category frequencies
/// (categorical). Missing cells are ignored. Throws SchemaMismatch, EmptyTable.
double shape_score(const Table& ref, const Table& syn);

/// Mean over unordered column pairs: numerical pairs score 1 - |rho_ref -
/// rho_syn| / 2 (Pearson); pairs with a categorical column score 1 - TVD of the
/// joint frequency tables, numerical partners binned at ref's quartiles.
double trend_score(const Table& ref, const Table& syn);

/// Median over syn rows of the Euclidean distance to the closest ref row;
/// numericals are z-scored with ref statistics, each categorical mismatch adds 1
/// to the squared distance.
double dcr(const Table& ref, const Table& syn);

/// Two-sample Kolmogorov-Smirnov statistic of two samples.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Aggregation -----------------------------------------------------------------

enum class Direction { HigherBetter, LowerBetter };

inline constexpr std::array<std::string_view, 7> kMetricNames{"shape",          "trend",    "dcr",      "local_utility",
                                                               "global_utility", "local_ci", "global_ci"};

/// Throws InvalidConfig for unknown names. Every built-in metric is higher-better.
Direction metric_direction(std::string_view name);

struct MetricValue {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::HigherBetter;
};

/// Affine map of the values onto [0, 1] with the best value at 1; all-equal
/// inputs map to 1. Throws NonFiniteValue.
std::vector<double> adtm_normalize(std::span<const double> values, Direction direction);

/// Pearson correlation of average ranks. Throws LengthMismatch (sizes differ
/// or fewer than 2) and ConstantVector.
template <typename DerivedA, typename DerivedB>
double spearman(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::LengthMismatch, "spearman needs equal sizes >= 2");
  const Eigen::VectorXd xv = x.template cast<double>();
  const Eigen::VectorXd yv = y.template cast<double>();
  for (const Eigen::VectorXd* v : {&xv, &yv}) {
    if (!v->allFinite()) throw Error(ErrorCode::NonFiniteValue, "spearman input is not finite");
    if (v->maxCoeff() == v->minCoeff()) throw Error(ErrorCode::ConstantVector, "spearman input is constant");
  }
  return pearson(average_ranks(xv), average_ranks(yv));
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  using Map = Eigen::Map<const Eigen::VectorXd>;
  return spearman(Map(x.data(), static_cast<Eigen::Index>(x.size())), Map(y.data(), static_cast<Eigen::Index>(y.size())));
}

}  // namespace structfid
