#include "structfid/ci_tests.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "structfid/error.hpp"
#include "structfid/stats.hpp"

namespace structfid {

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0 || statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace {

constexpr double kCorrelationClamp = 1.0 - 1e-12;

void check_indices(const Table& t, int j, int k, std::span<const int> s) {
  auto valid = [&](int c) { return c >= 0 && c < t.cols(); };
  if (!valid(j) || !valid(k) || j == k) throw Error(ErrorCode::InvalidNode, "invalid test pair");
  for (int c : s) {
    if (!valid(c)) throw Error(ErrorCode::InvalidNode, "conditioning column out of range");
    if (c == j || c == k) throw Error(ErrorCode::OverlappingSet, "conditioning set contains a tested column");
  }
}

/// Rows with no missing value among the involved columns.
std::vector<Eigen::Index> complete_rows(const Table& t, int j, int k, std::span<const int> s) {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    bool complete = !std::isnan(t(r, j)) && !std::isnan(t(r, k));
    for (int c : s) complete = complete && !std::isnan(t(r, c));
    if (complete) rows.push_back(r);
  }
  return rows;
}

CiTestResult fisher_z(double r, double effective_n, double alpha, double comparisons = 1.0) {
  const double clamped = std::clamp(r, -kCorrelationClamp, kCorrelationClamp);
  CiTestResult result;
  result.dof = effective_n;
  result.statistic = std::sqrt(effective_n) * std::atanh(clamped);
  result.p_value = std::min(1.0, comparisons * 2.0 * normal_sf(std::abs(result.statistic)));
  result.rejected = result.p_value < alpha;
  return result;
}

/// Column block of the encoded design for column c over `rows`. Categorical
/// columns become indicators for categories 1..C-1.
Eigen::MatrixXd drop_first_block(const Table& t, int c, const std::vector<Eigen::Index>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (!t.is_categorical(c)) {
    Eigen::MatrixXd out(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = t(rows[static_cast<std::size_t>(i)], c);
    return out;
  }
  const int categories = t.column(c).category_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, std::max(categories - 1, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int level = static_cast<int>(t(rows[static_cast<std::size_t>(i)], c));
    if (level > 0) out(i, level - 1) = 1.0;
  }
  return out;
}

Eigen::MatrixXd conditioning_design(const Table& t, std::span<const int> s, const std::vector<Eigen::Index>& rows) {
  Eigen::Index width = 0;
  std::vector<Eigen::MatrixXd> blocks;
  for (int c : s) {
    blocks.push_back(drop_first_block(t, c, rows));
    width += blocks.back().cols();
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), width);
  Eigen::Index offset = 0;
  for (const auto& block : blocks) {
    design.middleCols(offset, block.cols()) = block;
    offset += block.cols();
  }
  return design;
}

}  // namespace

Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& design) {
  const Eigen::Index n = y.rows();
  if (design.cols() == 0) return y.rowwise() - y.colwise().mean();
  Eigen::MatrixXd x(n, design.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(design.cols()) = design;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() == x.cols()) return y - x * qr.solve(y);
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += 1e-8;
  const Eigen::MatrixXd beta = gram.ldlt().solve(x.transpose() * y);
  return y - x * beta;
}

CiTestResult chi_square_ci(const Table& t, int j, int k, std::span<const int> s, double alpha) {
  check_indices(t, j, k, s);
  if (!t.is_categorical(j) || !t.is_categorical(k)) {
    throw Error(ErrorCode::NonCategoricalColumn, "chi-square test needs categorical test columns");
  }
  for (int c : s) {
    if (!t.is_categorical(c)) throw Error(ErrorCode::NonCategoricalColumn, "chi-square test needs categorical strata");
  }
  const std::vector<Eigen::Index> rows = complete_rows(t, j, k, s);
  if (rows.empty()) throw Error(ErrorCode::EmptyTable, "no complete rows for chi-square test");

  const int levels_j = t.column(j).category_count();
  const int levels_k = t.column(k).category_count();
  const std::size_t cells = static_cast<std::size_t>(levels_j) * static_cast<std::size_t>(levels_k);

  // Stratum id per row, assigned in order of first appearance.
  std::map<std::vector<int>, std::size_t> stratum_of;
  std::vector<int> key(s.size());
  std::vector<std::size_t> stratum(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t m = 0; m < s.size(); ++m) key[m] = static_cast<int>(t(rows[i], s[m]));
    stratum[i] = stratum_of.try_emplace(key, stratum_of.size()).first->second;
  }

  std::vector<double> counts(stratum_of.size() * cells, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto a = static_cast<std::size_t>(t(rows[i], j));
    const auto b = static_cast<std::size_t>(t(rows[i], k));
    counts[stratum[i] * cells + a * static_cast<std::size_t>(levels_k) + b] += 1.0;
  }

  CiTestResult result;
  std::vector<double> row_sum(static_cast<std::size_t>(levels_j));
  std::vector<double> col_sum(static_cast<std::size_t>(levels_k));
  for (std::size_t st = 0; st < stratum_of.size(); ++st) {
    const double* table = counts.data() + st * cells;
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    double total = 0.0;
    for (int a = 0; a < levels_j; ++a) {
      for (int b = 0; b < levels_k; ++b) {
        const double o = table[a * levels_k + b];
        row_sum[a] += o;
        col_sum[b] += o;
        total += o;
      }
    }
    const auto observed_rows = std::count_if(row_sum.begin(), row_sum.end(), [](double v) { return v > 0; });
    const auto observed_cols = std::count_if(col_sum.begin(), col_sum.end(), [](double v) { return v > 0; });
    const double dof = static_cast<double>((observed_rows - 1) * (observed_cols - 1));
    if (dof <= 0.0) continue;
    double statistic = 0.0;
    for (int a = 0; a < levels_j; ++a) {
      if (row_sum[a] == 0.0) continue;
      for (int b = 0; b < levels_k; ++b) {
        if (col_sum[b] == 0.0) continue;
        const double expected = row_sum[a] * col_sum[b] / total;
        const double diff = table[a * levels_k + b] - expected;
        statistic += diff * diff / expected;
      }
    }
    result.statistic += statistic;
    result.dof += dof;
  }
  result.p_value = result.dof > 0.0 ? chi_square_sf(result.statistic, result.dof) : 1.0;
  result.rejected = result.p_value < alpha;
  return result;
}

CiTestResult partial_corr_ci(const Table& t, int j, int k, std::span<const int> s, double alpha) {
  check_indices(t, j, k, s);
  if (t.is_categorical(j) || t.is_categorical(k)) {
    throw Error(ErrorCode::SchemaMismatch, "partial correlation needs numerical test columns");
  }
  for (int c : s) {
    if (t.is_categorical(c)) throw Error(ErrorCode::SchemaMismatch, "partial correlation needs numerical conditioning");
  }
  const std::vector<Eigen::Index> rows = complete_rows(t, j, k, s);
  const double effective_n = static_cast<double>(rows.size()) - static_cast<double>(s.size()) - 3.0;
  if (effective_n <= 0.0) throw Error(ErrorCode::InsufficientRows, "partial correlation needs n > |s| + 3");

  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), 2);
  y.col(0) = drop_first_block(t, j, rows);
  y.col(1) = drop_first_block(t, k, rows);
  const Eigen::MatrixXd residuals = residualize(y, conditioning_design(t, s, rows));
  return fisher_z(pearson(residuals.col(0), residuals.col(1)), effective_n, alpha);
}

CiTestResult residual_ci(const Table& t, int j, int k, std::span<const int> s, double alpha) {
  check_indices(t, j, k, s);
  const std::vector<Eigen::Index> rows = complete_rows(t, j, k, s);
  const Eigen::MatrixXd design = conditioning_design(t, s, rows);
  const double effective_n = static_cast<double>(rows.size()) - static_cast<double>(design.cols()) - 3.0;
  if (effective_n <= 0.0) throw Error(ErrorCode::InsufficientRows, "residual test needs n > encoded |s| + 3");

  const Eigen::MatrixXd block_j = drop_first_block(t, j, rows);
  const Eigen::MatrixXd block_k = drop_first_block(t, k, rows);
  if (block_j.cols() == 0 || block_k.cols() == 0) return CiTestResult{};  // single-category column

  Eigen::MatrixXd y(block_j.rows(), block_j.cols() + block_k.cols());
  y << block_j, block_k;
  const Eigen::MatrixXd residuals = residualize(y, design);

  double best = 0.0;
  for (Eigen::Index a = 0; a < block_j.cols(); ++a) {
    for (Eigen::Index b = 0; b < block_k.cols(); ++b) {
      const double r = pearson(residuals.col(a), residuals.col(block_j.cols() + b));
      if (std::abs(r) > std::abs(best)) best = r;
    }
  }
  const double comparisons = static_cast<double>(block_j.cols() * block_k.cols());
  return fisher_z(best, effective_n, alpha, comparisons);
}

bool statement_holds(const CiStatement& statement, const Table& t, double alpha) {
  const auto& s = statement.conditioning_set;
  bool all_categorical = t.is_categorical(statement.j) && t.is_categorical(statement.k);
  bool all_numerical = !t.is_categorical(statement.j) && !t.is_categorical(statement.k);
  for (int c : s) {
    all_categorical = all_categorical && t.is_categorical(c);
    all_numerical = all_numerical && !t.is_categorical(c);
  }
  CiTestResult result;
  if (all_categorical) {
    result = chi_square_ci(t, statement.j, statement.k, s, alpha);
  } else if (all_numerical) {
    result = partial_corr_ci(t, statement.j, statement.k, s, alpha);
  } else {
    result = residual_ci(t, statement.j, statement.k, s, alpha);
  }
  return statement.kind == CiKind::Independent ? !result.rejected : result.rejected;
}

double ci_score(const CiCatalog& catalog, const Table& t, double alpha) {
  if (catalog.empty()) throw Error(ErrorCode::EmptyCatalog, "CI score of an empty catalog is undefined");
  std::size_t holding = 0;
  for (const CiStatement& statement : catalog.statements) {
    if (statement_holds(statement, t, alpha)) ++holding;
  }
  return static_cast<double>(holding) / static_cast<double>(catalog.size());
}

}  // namespace structfid
