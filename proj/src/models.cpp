#include "structfid/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "structfid/error.hpp"
#include "structfid/rng.hpp"

namespace structfid {

namespace {

Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c) {
    if (scores(c) > scores(best)) best = c;
  }
  return best;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

}  // namespace

// KNN -------------------------------------------------------------------------

void KnnModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task) {
  if (k_ < 1) throw Error(ErrorCode::InvalidConfig, "KNN needs k >= 1");
  if (x.rows() == 0) throw Error(ErrorCode::EmptyTable, "KNN fit on empty data");
  x_ = x;
  y_ = y;
  task_ = task;
}

Eigen::VectorXd KnnModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::Index n = x_.rows();
  const auto k = static_cast<Eigen::Index>(std::min<Eigen::Index>(k_, n));
  Eigen::VectorXd out(x.rows());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<int> votes(static_cast<std::size_t>(std::max(task_.classes, 1)));
  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    const Eigen::VectorXd distance = (x_.rowwise() - x.row(q)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return distance(a) < distance(b) || (distance(a) == distance(b) && a < b);
    });
    if (task_.classification()) {
      std::fill(votes.begin(), votes.end(), 0);
      for (Eigen::Index i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(y_(order[i]))];
      out(q) = static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    } else {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) sum += y_(order[i]);
      out(q) = sum / static_cast<double>(k);
    }
  }
  return out;
}

// Linear ----------------------------------------------------------------------

namespace {

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& xa, const Eigen::VectorXd& target, double ridge,
                             int max_iterations) {
  const Eigen::Index p = xa.cols();
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, ridge);
  penalty(0) = 1e-8;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd prob = (1.0 + (-(xa * beta).array()).exp()).inverse().matrix();
    const Eigen::VectorXd weight = (prob.array() * (1.0 - prob.array())).max(1e-10).matrix();
    const Eigen::VectorXd gradient = xa.transpose() * (prob - target) + penalty.cwiseProduct(beta);
    Eigen::MatrixXd hessian = xa.transpose() * weight.asDiagonal() * xa;
    hessian.diagonal() += penalty;
    const Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    beta -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-8) break;
  }
  return beta;
}

}  // namespace

void LinearModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task) {
  if (!(ridge_ >= 0.0)) throw Error(ErrorCode::InvalidConfig, "ridge strength must be non-negative");
  if (x.rows() == 0) throw Error(ErrorCode::EmptyTable, "linear fit on empty data");
  task_ = task;
  const Eigen::Index p = x.cols();
  if (!task.classification()) {
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += std::max(ridge_, 1e-10);
    const Eigen::VectorXd beta = gram.ldlt().solve(xc.transpose() * (y.array() - y_mean).matrix());
    coefficients_.resize(p + 1, 1);
    coefficients_(0, 0) = y_mean - x_mean.dot(beta);
    coefficients_.bottomRows(p) = beta;
    return;
  }
  const Eigen::MatrixXd xa = with_intercept(x);
  if (task.classes == 2) {
    coefficients_ = fit_logistic(xa, (y.array() == 1.0).cast<double>().matrix(), ridge_, max_iterations_);
    return;
  }
  coefficients_.resize(p + 1, task.classes);
  for (int c = 0; c < task.classes; ++c) {
    coefficients_.col(c) =
        fit_logistic(xa, (y.array() == static_cast<double>(c)).cast<double>().matrix(), ridge_, max_iterations_);
  }
}

Eigen::MatrixXd LinearModel::decision_function(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd scores = with_intercept(x) * coefficients_;
  if (task_.classes != 2) return scores;
  Eigen::MatrixXd binary(x.rows(), 2);
  binary.col(0).setZero();
  binary.col(1) = scores.col(0);
  return binary;
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& x) const {
  if (!task_.classification()) return with_intercept(x) * coefficients_.col(0);
  const Eigen::MatrixXd scores = decision_function(x);
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = static_cast<double>(argmax_lowest(scores.row(r).transpose()));
  return out;
}

// GBDT ------------------------------------------------------------------------

namespace {

double tree_value(const GbdtModel::Tree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = tree[static_cast<std::size_t>(node)];
    node = row(n.feature) <= n.threshold ? n.left : n.right;
  }
  return tree[static_cast<std::size_t>(node)].value;
}

}  // namespace

GbdtModel::Tree GbdtModel::grow_tree(const Eigen::MatrixXd& x, const std::vector<std::vector<Eigen::Index>>& sorted,
                                     const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian,
                                     const std::vector<char>& in_sample) const {
  const Eigen::Index n = x.rows();
  const double lambda = params_.l2;
  Tree tree(1);
  std::vector<int> node_of(static_cast<std::size_t>(n), -1);
  struct Totals {
    double g = 0.0, h = 0.0;
    Eigen::Index count = 0;
  };
  std::vector<Totals> totals(1);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!in_sample[static_cast<std::size_t>(r)]) continue;
    node_of[static_cast<std::size_t>(r)] = 0;
    totals[0].g += gradient(r);
    totals[0].h += hessian(r);
    ++totals[0].count;
  }
  auto leaf_value = [&](const Totals& t) { return -params_.learning_rate * t.g / (t.h + lambda); };
  auto score = [lambda](double g, double h) { return g * g / (h + lambda); };

  std::vector<int> active{0};
  for (int depth = 0; depth < params_.max_depth && !active.empty(); ++depth) {
    const std::size_t node_total = tree.size();
    struct Best {
      double gain = 1e-12;
      int feature = -1;
      double threshold = 0.0;
    };
    std::vector<Best> best(node_total);
    std::vector<char> splittable(node_total, 0);
    for (int m : active) {
      splittable[static_cast<std::size_t>(m)] = totals[static_cast<std::size_t>(m)].count >= 2 * params_.min_samples_leaf;
    }

    std::vector<Totals> left(node_total);
    std::vector<double> last(node_total);
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      std::fill(left.begin(), left.end(), Totals{});
      for (Eigen::Index r : sorted[static_cast<std::size_t>(f)]) {
        const int m = node_of[static_cast<std::size_t>(r)];
        if (m < 0 || !splittable[static_cast<std::size_t>(m)]) continue;
        Totals& l = left[static_cast<std::size_t>(m)];
        const double v = x(r, f);
        if (l.count > 0 && v > last[static_cast<std::size_t>(m)]) {
          const Totals& all = totals[static_cast<std::size_t>(m)];
          const Eigen::Index right_count = all.count - l.count;
          if (l.count >= params_.min_samples_leaf && right_count >= params_.min_samples_leaf) {
            const double gain = score(l.g, l.h) + score(all.g - l.g, all.h - l.h) - score(all.g, all.h);
            Best& b = best[static_cast<std::size_t>(m)];
            if (gain > b.gain) b = Best{gain, static_cast<int>(f), last[static_cast<std::size_t>(m)]};
          }
        }
        l.g += gradient(r);
        l.h += hessian(r);
        ++l.count;
        last[static_cast<std::size_t>(m)] = v;
      }
    }

    std::vector<int> next;
    std::vector<int> left_child(node_total, -1);
    for (int m : active) {
      const Best& b = best[static_cast<std::size_t>(m)];
      if (b.feature < 0) continue;
      const int l = static_cast<int>(tree.size());
      tree.emplace_back();
      tree.emplace_back();
      totals.resize(tree.size());
      Node& node = tree[static_cast<std::size_t>(m)];
      node.feature = b.feature;
      node.threshold = b.threshold;
      node.left = l;
      node.right = l + 1;
      left_child[static_cast<std::size_t>(m)] = l;
      next.push_back(l);
      next.push_back(l + 1);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const int m = node_of[static_cast<std::size_t>(r)];
      if (m < 0 || left_child[static_cast<std::size_t>(m)] < 0) continue;
      const Node& node = tree[static_cast<std::size_t>(m)];
      const int child = x(r, node.feature) <= node.threshold ? node.left : node.right;
      node_of[static_cast<std::size_t>(r)] = child;
      Totals& t = totals[static_cast<std::size_t>(child)];
      t.g += gradient(r);
      t.h += hessian(r);
      ++t.count;
    }
    active = std::move(next);
  }
  for (std::size_t m = 0; m < tree.size(); ++m) {
    if (tree[m].feature < 0) tree[m].value = leaf_value(totals[m]);
  }
  return tree;
}

void GbdtModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task) {
  if (params_.trees < 1 || params_.max_depth < 1 || !(params_.learning_rate > 0.0) || params_.min_samples_leaf < 1 ||
      !(params_.subsample > 0.0 && params_.subsample <= 1.0) || !(params_.l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "invalid GBDT hyperparameters");
  }
  const Eigen::Index n = x.rows();
  if (n == 0) throw Error(ErrorCode::EmptyTable, "GBDT fit on empty data");
  task_ = task;
  outputs_ = task.classification() ? task.classes : 1;
  trees_.clear();

  std::vector<std::vector<Eigen::Index>> sorted(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& order = sorted[static_cast<std::size_t>(f)];
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
  }

  base_score_ = Eigen::VectorXd::Zero(outputs_);
  if (task.classification()) {
    for (int c = 0; c < outputs_; ++c) {
      const double count = static_cast<double>((y.array() == static_cast<double>(c)).count());
      base_score_(c) = std::log(std::max(count, 0.5) / static_cast<double>(n));
    }
  } else {
    base_score_(0) = y.mean();
  }
  Eigen::MatrixXd scores = base_score_.transpose().replicate(n, 1);

  Rng rng(derive_seed(params_.seed, stable_hash("gbdt")));
  std::vector<char> in_sample(static_cast<std::size_t>(n), 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  const auto sample_size = static_cast<std::size_t>(std::max<double>(1.0, std::floor(params_.subsample * static_cast<double>(n))));

  Eigen::VectorXd gradient(n), hessian(n);
  for (int round = 0; round < params_.trees; ++round) {
    if (sample_size < static_cast<std::size_t>(n)) {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
      rng.shuffle(std::span<Eigen::Index>(rows));
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (std::size_t i = 0; i < sample_size; ++i) in_sample[static_cast<std::size_t>(rows[i])] = 1;
    }
    Eigen::MatrixXd prob;
    if (task.classification()) {
      prob = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp().matrix();
      prob.array().colwise() /= prob.rowwise().sum().array();
    }
    for (int c = 0; c < outputs_; ++c) {
      if (task.classification()) {
        const Eigen::ArrayXd onehot = (y.array() == static_cast<double>(c)).cast<double>();
        gradient = (prob.col(c).array() - onehot).matrix();
        hessian = (prob.col(c).array() * (1.0 - prob.col(c).array())).max(1e-12).matrix();
      } else {
        gradient = scores.col(0) - y;
        hessian.setOnes();
      }
      Tree tree = grow_tree(x, sorted, gradient, hessian, in_sample);
      for (Eigen::Index r = 0; r < n; ++r) scores(r, c) += tree_value(tree, x.row(r));
      trees_.push_back(std::move(tree));
    }
  }
}

Eigen::MatrixXd GbdtModel::raw_scores(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd scores = base_score_.transpose().replicate(x.rows(), 1);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto c = static_cast<Eigen::Index>(t % static_cast<std::size_t>(outputs_));
    for (Eigen::Index r = 0; r < x.rows(); ++r) scores(r, c) += tree_value(trees_[t], x.row(r));
  }
  return scores;
}

Eigen::VectorXd GbdtModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd scores = raw_scores(x);
  if (!task_.classification()) return scores.col(0);
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = static_cast<double>(argmax_lowest(scores.row(r).transpose()));
  return out;
}

}  // namespace structfid
