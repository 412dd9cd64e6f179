#include "structfid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "structfid/preprocess.hpp"

namespace structfid {

namespace {

std::vector<double> observed(const Table& t, int c) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    if (!std::isnan(t(r, c))) out.push_back(t(r, c));
  }
  return out;
}

void require_comparable(const Table& ref, const Table& syn) {
  require_same_schema(ref, syn);
  if (ref.rows() == 0 || syn.rows() == 0) throw Error(ErrorCode::EmptyTable, "metric needs non-empty tables");
}

/// Total variation distance between two count maps normalised to frequencies.
template <typename Key>
double tvd(const std::map<Key, double>& a, double total_a, const std::map<Key, double>& b, double total_b) {
  if (total_a == 0.0 || total_b == 0.0) return total_a == total_b ? 0.0 : 1.0;
  double sum = 0.0;
  for (const auto& [key, count] : a) {
    const auto it = b.find(key);
    sum += std::abs(count / total_a - (it == b.end() ? 0.0 : it->second / total_b));
  }
  for (const auto& [key, count] : b) {
    if (!a.contains(key)) sum += count / total_b;
  }
  return 0.5 * sum;
}

/// Value used for a column inside a joint frequency table: the category for
/// categorical columns, the quartile bin (0..3) for numerical ones.
struct Discretizer {
  bool categorical = true;
  std::vector<double> cuts;

  int operator()(double v) const {
    if (categorical) return static_cast<int>(v);
    return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
  }
};

Discretizer discretizer(const Table& ref, int c) {
  Discretizer d;
  d.categorical = ref.is_categorical(c);
  if (!d.categorical) {
    std::vector<double> sorted = observed(ref, c);
    std::sort(sorted.begin(), sorted.end());
    d.cuts = {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5), quantile_sorted(sorted, 0.75)};
  }
  return d;
}

double joint_tvd(const Table& ref, const Table& syn, int a, int b, const Discretizer& da, const Discretizer& db) {
  auto counts = [&](const Table& t, double& total) {
    std::map<std::pair<int, int>, double> out;
    total = 0.0;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if (std::isnan(t(r, a)) || std::isnan(t(r, b))) continue;
      out[{da(t(r, a)), db(t(r, b))}] += 1.0;
      total += 1.0;
    }
    return out;
  };
  double total_ref = 0.0;
  double total_syn = 0.0;
  const auto ref_counts = counts(ref, total_ref);
  const auto syn_counts = counts(syn, total_syn);
  return tvd(ref_counts, total_ref, syn_counts, total_syn);
}

double pair_correlation(const Table& t, int a, int b) {
  std::vector<double> xa;
  std::vector<double> xb;
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    if (std::isnan(t(r, a)) || std::isnan(t(r, b))) continue;
    xa.push_back(t(r, a));
    xb.push_back(t(r, b));
  }
  using Map = Eigen::Map<const Eigen::VectorXd>;
  return pearson(Map(xa.data(), static_cast<Eigen::Index>(xa.size())), Map(xb.data(), static_cast<Eigen::Index>(xb.size())));
}

}  // namespace

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty() ? 0.0 : 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double shape_score(const Table& ref, const Table& syn) {
  require_comparable(ref, syn);
  double total = 0.0;
  for (int c = 0; c < ref.cols(); ++c) {
    if (!ref.is_categorical(c)) {
      total += 1.0 - ks_statistic(observed(ref, c), observed(syn, c));
      continue;
    }
    auto frequencies = [c](const Table& t, double& n) {
      std::map<int, double> out;
      n = 0.0;
      for (double v : observed(t, c)) {
        out[static_cast<int>(v)] += 1.0;
        n += 1.0;
      }
      return out;
    };
    double n_ref = 0.0;
    double n_syn = 0.0;
    const auto f_ref = frequencies(ref, n_ref);
    const auto f_syn = frequencies(syn, n_syn);
    total += 1.0 - tvd(f_ref, n_ref, f_syn, n_syn);
  }
  return total / ref.cols();
}

double trend_score(const Table& ref, const Table& syn) {
  require_comparable(ref, syn);
  std::vector<Discretizer> bins;
  for (int c = 0; c < ref.cols(); ++c) bins.push_back(discretizer(ref, c));
  double total = 0.0;
  int pairs = 0;
  for (int a = 0; a < ref.cols(); ++a) {
    for (int b = a + 1; b < ref.cols(); ++b) {
      if (!ref.is_categorical(a) && !ref.is_categorical(b)) {
        total += 1.0 - std::abs(pair_correlation(ref, a, b) - pair_correlation(syn, a, b)) / 2.0;
      } else {
        total += 1.0 - joint_tvd(ref, syn, a, b, bins[static_cast<std::size_t>(a)], bins[static_cast<std::size_t>(b)]);
      }
      ++pairs;
    }
  }
  return total / pairs;
}

double dcr(const Table& ref, const Table& syn) {
  require_comparable(ref, syn);
  const Preprocessor p = fit_preprocessor(ref);
  const Eigen::MatrixXd zr = apply_preprocessor(p, ref).values();
  const Eigen::MatrixXd zs = apply_preprocessor(p, syn).values();

  std::vector<int> numerical;
  std::vector<int> categorical;
  for (int c = 0; c < ref.cols(); ++c) (ref.is_categorical(c) ? categorical : numerical).push_back(c);
  Eigen::MatrixXd nr(zr.rows(), static_cast<Eigen::Index>(numerical.size()));
  Eigen::MatrixXd ns(zs.rows(), static_cast<Eigen::Index>(numerical.size()));
  for (std::size_t i = 0; i < numerical.size(); ++i) {
    nr.col(static_cast<Eigen::Index>(i)) = zr.col(numerical[i]);
    ns.col(static_cast<Eigen::Index>(i)) = zs.col(numerical[i]);
  }

  std::vector<double> nearest(static_cast<std::size_t>(zs.rows()));
  for (Eigen::Index s = 0; s < zs.rows(); ++s) {
    Eigen::VectorXd squared = (nr.rowwise() - ns.row(s)).rowwise().squaredNorm();
    for (int c : categorical) squared.array() += (zr.col(c).array() != zs(s, c)).cast<double>();
    nearest[static_cast<std::size_t>(s)] = std::sqrt(squared.minCoeff());
  }
  return median(std::move(nearest));
}

Direction metric_direction(std::string_view name) {
  if (std::find(kMetricNames.begin(), kMetricNames.end(), name) == kMetricNames.end()) {
    throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(name) + "'");
  }
  return Direction::HigherBetter;
}

std::vector<double> adtm_normalize(std::span<const double> values, Direction direction) {
  if (values.empty()) throw Error(ErrorCode::LengthMismatch, "ADTM needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "ADTM input is not finite");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;
  std::vector<double> out(values.size(), 1.0);
  if (max == min) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = direction == Direction::HigherBetter ? (values[i] - min) / (max - min) : (max - values[i]) / (max - min);
  }
  return out;
}

}  // namespace structfid
