#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace structfid {

/// Classification tasks use labels 0..classes-1 stored as doubles; classes == 0
/// means regression.
struct Task {
  int classes = 0;
  bool classification() const noexcept { return classes > 0; }
};

/// k-nearest neighbours on Euclidean distance; neighbour ties go to the lower
/// row index, vote ties to the lower class label.
class KnnModel {
 public:
  explicit KnnModel(int k = 5) : k_(k) {}
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task);
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

 private:
  int k_;
  Task task_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
};

/// Ridge regression (closed form) or one-vs-rest ridge logistic regression
/// fitted by iteratively reweighted least squares. The intercept is never
/// penalised.
class LinearModel {
 public:
  explicit LinearModel(double ridge = 1.0, int max_iterations = 100) : ridge_(ridge), max_iterations_(max_iterations) {}
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task);
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  /// Class scores (logits) per row, one column per class; classification only.
  Eigen::MatrixXd decision_function(const Eigen::MatrixXd& x) const;

 private:
  double ridge_;
  int max_iterations_;
  Task task_;
  Eigen::MatrixXd coefficients_;  // (features + 1) x outputs, intercept in row 0
};

struct GbdtParams {
  int trees = 50;
  int max_depth = 3;
  double learning_rate = 0.1;
  double l2 = 1.0;
  int min_samples_leaf = 5;
  double subsample = 1.0;  // row fraction per tree, drawn from `seed` when < 1
  std::uint64_t seed = 0;
};

/// Gradient-boosted regression trees: squared loss for regression, softmax
/// (one tree per class and round) for classification. Splits are exact and a
/// row goes left when its value is <= the largest training value of the left
/// partition, so fitted partitions only depend on the per-feature row order.
class GbdtModel {
 public:
  explicit GbdtModel(GbdtParams params = {}) : params_(params) {}
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task);
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const;

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  std::size_t tree_count() const noexcept { return trees_.size(); }

 private:
  Tree grow_tree(const Eigen::MatrixXd& x, const std::vector<std::vector<Eigen::Index>>& sorted,
                 const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian,
                 const std::vector<char>& in_sample) const;

  GbdtParams params_;
  Task task_;
  Eigen::VectorXd base_score_;
  std::vector<Tree> trees_;  // round-major, `outputs` trees per round
  int outputs_ = 1;
};

}  // namespace structfid
