#pragma once

#include <Eigen/Dense>
#include <span>

#include "structfid/ci_catalog.hpp"
#include "structfid/table.hpp"

namespace structfid {

inline constexpr double kDefaultAlpha = 0.01;

/// Upper tail of the chi-square distribution; dof = 0 gives 1.
double chi_square_sf(double statistic, double dof);
double normal_cdf(double z);
/// 1 - normal_cdf(z), accurate in the far tail.
double normal_sf(double z);

struct CiTestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool rejected = false;  // p_value < alpha
};

/// Stratified Pearson chi-square test; strata are the joint values of s.
/// Per stratum, dof = (R-1)(C-1) over the categories observed there.
/// Throws NonCategoricalColumn, EmptyTable.
CiTestResult chi_square_ci(const Table& t, int j, int k, std::span<const int> s, double alpha = kDefaultAlpha);

/// Partial correlation via least-squares residuals on s (with intercept),
/// Fisher z with sqrt(n - |s| - 3) scaling, two-sided.
/// Throws InsufficientRows, NonCategoricalColumn (for categorical inputs).
CiTestResult partial_corr_ci(const Table& t, int j, int k, std::span<const int> s, double alpha = kDefaultAlpha);

/// Residualisation test for mixed kinds: s is one-hot encoded (drop-first),
/// categorical j/k contribute their drop-first indicator columns and the
/// largest |residual correlation| over indicator pairs is tested with a
/// Bonferroni-adjusted p-value.
CiTestResult residual_ci(const Table& t, int j, int k, std::span<const int> s, double alpha = kDefaultAlpha);

/// Tests one statement with the test matching the kinds of its variables
/// (all categorical: chi-square, all numerical: partial correlation, else
/// residualisation) and reports whether the data agrees with it.
bool statement_holds(const CiStatement& statement, const Table& t, double alpha = kDefaultAlpha);

/// Fraction of catalog statements that hold on t. Throws EmptyCatalog.
double ci_score(const CiCatalog& catalog, const Table& t, double alpha = kDefaultAlpha);

/// Residuals of each column of `y` after least squares on [1, design].
/// Rank-deficient designs are solved with a 1e-8 ridge on the normal equations.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& design);

}  // namespace structfid
