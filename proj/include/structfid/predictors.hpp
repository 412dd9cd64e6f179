#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "structfid/error.hpp"
#include "structfid/models.hpp"
#include "structfid/table.hpp"

namespace structfid {

enum class ModelKind { Knn, Linear, Gbdt };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);  // "KNN" | "LINEAR" | "GBDT"

/// Models are fitted on the training table and the one with the best
/// validation score supplies the reported test score.
struct PredictorConfig {
  std::vector<ModelKind> roster{ModelKind::Knn, ModelKind::Linear, ModelKind::Gbdt};
  int knn_k = 5;
  double ridge = 1.0;
  int logistic_max_iterations = 100;
  GbdtParams gbdt;

  /// Throws InvalidConfig.
  void validate() const;
};

enum class PerfMetric { BalancedAccuracy, Rmse };

struct PerfScore {
  double value = 0.0;
  PerfMetric metric = PerfMetric::BalancedAccuracy;
};

/// Mean per-class recall of a square confusion matrix (rows: truth).
/// Throws EmptyClass when a row sums to zero.
template <typename Derived>
double balanced_accuracy(const Eigen::MatrixBase<Derived>& confusion) {
  if (confusion.rows() != confusion.cols() || confusion.rows() == 0) {
    throw Error(ErrorCode::LengthMismatch, "confusion matrix must be square and non-empty");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < confusion.rows(); ++c) {
    const double row = static_cast<double>(confusion.row(c).sum());
    if (!(row > 0.0)) throw Error(ErrorCode::EmptyClass, "class without true rows");
    total += static_cast<double>(confusion(c, c)) / row;
  }
  return total / static_cast<double>(confusion.rows());
}

/// Balanced accuracy over the classes present in `truth`; predictions outside
/// [0, classes) never count as correct.
double balanced_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted, int classes);

template <typename DerivedA, typename DerivedB>
double rmse(const Eigen::MatrixBase<DerivedA>& predicted, const Eigen::MatrixBase<DerivedB>& truth) {
  if (predicted.size() != truth.size() || predicted.size() == 0) {
    throw Error(ErrorCode::LengthMismatch, "rmse needs equally sized non-empty vectors");
  }
  return std::sqrt((predicted.template cast<double>() - truth.template cast<double>()).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

/// Fits every roster model on `train` to predict column `target` from all other
/// columns and returns the test score of the best model on `val` (balanced
/// accuracy for categorical targets, RMSE on the raw scale otherwise).
/// Throws SingleClassTrain, SchemaMismatch, EmptyTable.
PerfScore train_eval(const Table& train, const Table& test, int target, const PredictorConfig& cfg, const Table& val,
                     std::uint64_t seed);

/// Perf(eval)/Perf(ref) for balanced accuracy, Perf(ref)/Perf(eval) for RMSE.
/// Throws DegenerateReference when the denominator is below 1e-9.
double utility_ratio(const PerfScore& eval, const PerfScore& ref);

/// Seed used when column j is the prediction target.
std::uint64_t variable_seed(std::uint64_t seed, int j);

/// Per-variable scores for every column, each trained with seed derived from
/// (seed, column).
std::vector<PerfScore> variable_performances(const Table& train, const Table& val, const Table& test,
                                             const PredictorConfig& cfg, std::uint64_t seed);

double utility_per_variable(const Table& eval, const Table& ref, const Table& val, const Table& test, int j,
                            const PredictorConfig& cfg, std::uint64_t seed);

double local_utility(const Table& eval, const Table& ref, const Table& val, const Table& test,
                     const PredictorConfig& cfg, std::uint64_t seed);

/// Mean utility over all columns. Errors name the failing column index.
double global_utility(const Table& eval, const Table& ref, const Table& val, const Table& test,
                      const PredictorConfig& cfg, std::uint64_t seed);

/// Same as global_utility with the reference scores precomputed by
/// variable_performances(ref, ...).
double global_utility(const Table& eval, const std::vector<PerfScore>& reference, const Table& val,
                      const Table& test, const PredictorConfig& cfg, std::uint64_t seed);

}  // namespace structfid
