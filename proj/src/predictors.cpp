#include "structfid/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "structfid/preprocess.hpp"
#include "structfid/rng.hpp"

namespace structfid {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Knn: return "KNN";
    case ModelKind::Linear: return "LINEAR";
    case ModelKind::Gbdt: return "GBDT";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "KNN") return ModelKind::Knn;
  if (name == "LINEAR") return ModelKind::Linear;
  if (name == "GBDT") return ModelKind::Gbdt;
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(name) + "'");
}

void PredictorConfig::validate() const {
  if (roster.empty()) throw Error(ErrorCode::InvalidConfig, "predictor roster is empty");
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (std::find(roster.begin(), roster.begin() + static_cast<std::ptrdiff_t>(i), roster[i]) !=
        roster.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error(ErrorCode::InvalidConfig, "predictor roster lists a model twice");
    }
  }
  if (knn_k < 1) throw Error(ErrorCode::InvalidConfig, "knn_k must be >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error(ErrorCode::InvalidConfig, "ridge must be >= 0");
  if (logistic_max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "logistic_max_iterations must be >= 1");
  if (gbdt.trees < 1 || gbdt.max_depth < 1 || gbdt.min_samples_leaf < 1 || !(gbdt.learning_rate > 0.0) ||
      !(gbdt.l2 >= 0.0) || !(gbdt.subsample > 0.0 && gbdt.subsample <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "invalid GBDT hyperparameters");
  }
}

double balanced_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted, int classes) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::LengthMismatch, "truth and prediction lengths differ");
  if (truth.size() == 0) throw Error(ErrorCode::EmptyClass, "no rows to score");
  std::vector<double> seen(static_cast<std::size_t>(classes), 0.0);
  std::vector<double> hit(static_cast<std::size_t>(classes), 0.0);
  for (Eigen::Index r = 0; r < truth.size(); ++r) {
    const auto c = static_cast<std::size_t>(truth(r));
    seen[c] += 1.0;
    if (predicted(r) == truth(r)) hit[c] += 1.0;
  }
  double total = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] == 0.0) continue;
    total += hit[c] / seen[c];
    ++present;
  }
  return total / present;
}

namespace {

struct Prepared {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

bool better(PerfMetric metric, double candidate, double incumbent) {
  return metric == PerfMetric::BalancedAccuracy ? candidate > incumbent : candidate < incumbent;
}

}  // namespace

PerfScore train_eval(const Table& train, const Table& test, int target, const PredictorConfig& cfg, const Table& val,
                     std::uint64_t seed) {
  require_same_schema(train, test);
  require_same_schema(train, val);
  if (target < 0 || target >= train.cols()) throw Error(ErrorCode::InvalidNode, "target column out of range");

  // Rows without an observed target cannot be fitted or scored.
  auto labelled = [target](const Table& t) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (!std::isnan(t(r, target))) rows.push_back(r);
    }
    return rows.size() == static_cast<std::size_t>(t.rows()) ? t : t.select_rows(rows);
  };
  const Table train_l = labelled(train);
  const Table test_l = labelled(test);
  const Table val_l = labelled(val);
  if (train_l.rows() == 0) throw Error(ErrorCode::EmptyTable, "no labelled training rows");
  if (test_l.rows() == 0) throw Error(ErrorCode::EmptyTable, "no labelled test rows");

  const bool classification = train.is_categorical(target);
  const Preprocessor p = fit_preprocessor(train_l);
  const std::vector<int> features = all_columns_except(train.cols(), target);

  // Classes observed in training are relabelled 0..m-1; the rest map to -1.
  std::vector<int> compact;
  int observed = 0;
  if (classification) {
    compact.assign(static_cast<std::size_t>(train.column(target).category_count()), -1);
    for (Eigen::Index r = 0; r < train_l.rows(); ++r) compact[static_cast<std::size_t>(train_l(r, target))] = 0;
    for (int& c : compact) {
      if (c == 0) c = observed++;
    }
    if (observed < 2) throw Error(ErrorCode::SingleClassTrain, "training data has a single target class");
  }

  auto prepare = [&](const Table& t, bool relabel_to_compact) {
    Prepared out;
    out.x = encode(p, apply_preprocessor(p, t), features);
    out.y = t.col(target);
    if (classification && relabel_to_compact) {
      for (Eigen::Index r = 0; r < out.y.size(); ++r) out.y(r) = compact[static_cast<std::size_t>(out.y(r))];
    }
    return out;
  };
  const Prepared tr = prepare(train_l, true);
  const Prepared te = prepare(test_l, false);
  const Prepared va = val_l.rows() > 0 ? prepare(val_l, false) : prepare(train_l, false);

  const Task task{classification ? observed : 0};
  const int classes = classification ? train.column(target).category_count() : 0;
  std::vector<int> original;  // compact -> original label
  for (std::size_t c = 0; c < compact.size(); ++c) {
    if (compact[c] >= 0) original.push_back(static_cast<int>(c));
  }
  const PerfMetric metric = classification ? PerfMetric::BalancedAccuracy : PerfMetric::Rmse;
  auto score = [&](const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
    if (!classification) return rmse(predicted, truth);
    Eigen::VectorXd mapped(predicted.size());
    for (Eigen::Index r = 0; r < predicted.size(); ++r) mapped(r) = original[static_cast<std::size_t>(predicted(r))];
    return balanced_accuracy(truth, mapped, classes);
  };

  double best_val = 0.0;
  double best_test = 0.0;
  bool have_best = false;
  for (ModelKind kind : cfg.roster) {
    Eigen::VectorXd val_pred;
    Eigen::VectorXd test_pred;
    switch (kind) {
      case ModelKind::Knn: {
        KnnModel model(cfg.knn_k);
        model.fit(tr.x, tr.y, task);
        val_pred = model.predict(va.x);
        test_pred = model.predict(te.x);
        break;
      }
      case ModelKind::Linear: {
        LinearModel model(cfg.ridge, cfg.logistic_max_iterations);
        model.fit(tr.x, tr.y, task);
        val_pred = model.predict(va.x);
        test_pred = model.predict(te.x);
        break;
      }
      case ModelKind::Gbdt: {
        GbdtParams params = cfg.gbdt;
        params.seed = derive_seed(seed, stable_hash("gbdt"));
        GbdtModel model(params);
        model.fit(tr.x, tr.y, task);
        val_pred = model.predict(va.x);
        test_pred = model.predict(te.x);
        break;
      }
    }
    const double val_score = score(val_pred, va.y);
    if (!have_best || better(metric, val_score, best_val)) {
      best_val = val_score;
      best_test = score(test_pred, te.y);
      have_best = true;
    }
  }
  return PerfScore{best_test, metric};
}

double utility_ratio(const PerfScore& eval, const PerfScore& ref) {
  if (eval.metric != ref.metric) throw Error(ErrorCode::SchemaMismatch, "performance metrics differ");
  constexpr double kGuard = 1e-9;
  if (eval.metric == PerfMetric::BalancedAccuracy) {
    if (ref.value < kGuard) throw Error(ErrorCode::DegenerateReference, "reference balanced accuracy is zero");
    return eval.value / ref.value;
  }
  if (eval.value < kGuard) throw Error(ErrorCode::DegenerateReference, "evaluation RMSE is zero");
  return ref.value / eval.value;
}

std::uint64_t variable_seed(std::uint64_t seed, int j) { return derive_seed(seed, stable_hash("variable"), j); }

namespace {

Error with_index(const Error& e, int j) {
  return Error(e.code(), "variable " + std::to_string(j) + ": " + e.what());
}

}  // namespace

std::vector<PerfScore> variable_performances(const Table& train, const Table& val, const Table& test,
                                             const PredictorConfig& cfg, std::uint64_t seed) {
  std::vector<PerfScore> out;
  out.reserve(static_cast<std::size_t>(train.cols()));
  for (int j = 0; j < train.cols(); ++j) {
    try {
      out.push_back(train_eval(train, test, j, cfg, val, variable_seed(seed, j)));
    } catch (const Error& e) {
      throw with_index(e, j);
    }
  }
  return out;
}

double utility_per_variable(const Table& eval, const Table& ref, const Table& val, const Table& test, int j,
                            const PredictorConfig& cfg, std::uint64_t seed) {
  const std::uint64_t s = variable_seed(seed, j);
  return utility_ratio(train_eval(eval, test, j, cfg, val, s), train_eval(ref, test, j, cfg, val, s));
}

double local_utility(const Table& eval, const Table& ref, const Table& val, const Table& test,
                     const PredictorConfig& cfg, std::uint64_t seed) {
  return utility_per_variable(eval, ref, val, test, ref.target_index(), cfg, seed);
}

double global_utility(const Table& eval, const std::vector<PerfScore>& reference, const Table& val,
                      const Table& test, const PredictorConfig& cfg, std::uint64_t seed) {
  if (static_cast<int>(reference.size()) != eval.cols()) {
    throw Error(ErrorCode::LengthMismatch, "one reference score per column required");
  }
  double total = 0.0;
  for (int j = 0; j < eval.cols(); ++j) {
    try {
      total += utility_ratio(train_eval(eval, test, j, cfg, val, variable_seed(seed, j)),
                             reference[static_cast<std::size_t>(j)]);
    } catch (const Error& e) {
      throw with_index(e, j);
    }
  }
  return total / static_cast<double>(eval.cols());
}

double global_utility(const Table& eval, const Table& ref, const Table& val, const Table& test,
                      const PredictorConfig& cfg, std::uint64_t seed) {
  require_same_schema(eval, ref);
  return global_utility(eval, variable_performances(ref, val, test, cfg, seed), val, test, cfg, seed);
}

}  // namespace structfid
