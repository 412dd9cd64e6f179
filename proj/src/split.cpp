#include "structfid/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "structfid/error.hpp"
#include "structfid/rng.hpp"

namespace structfid {

std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights) {
  const std::int64_t weight_sum = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
  std::vector<std::int64_t> shares(weights.size(), 0);
  if (weight_sum == 0 || total == 0) return shares;

  // Exact integer arithmetic: quota_i = total * w_i / W.
  std::vector<std::int64_t> remainders(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    shares[i] = total * weights[i] / weight_sum;
    remainders[i] = total * weights[i] % weight_sum;
    assigned += shares[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++shares[order[i % order.size()]];
  return shares;
}

DataSplit split(const Table& table, std::uint64_t seed, int repeat_id, const SplitFractions& fractions) {
  const std::int64_t n = table.rows();
  if (n < 10) throw Error(ErrorCode::TooFewRows, "splitting needs at least 10 rows, got " + std::to_string(n));

  const auto test_size = static_cast<std::int64_t>(std::floor(fractions.test * static_cast<double>(n)));
  const auto val_size =
      static_cast<std::int64_t>(std::floor(fractions.validation * static_cast<double>(n - test_size)));

  DataSplit result;
  result.seed = seed;
  result.repeat_id = repeat_id;
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(repeat_id), stable_hash("split")));

  // Groups of row indices: one per class, or a single group for regression.
  std::vector<std::vector<Eigen::Index>> groups;
  const int target = table.target_index();
  if (table.is_categorical(target)) {
    groups.resize(static_cast<std::size_t>(table.column(target).category_count()));
    for (Eigen::Index r = 0; r < n; ++r) {
      const double v = table(r, target);
      if (std::isnan(v)) throw Error(ErrorCode::ClassTooSmall, "missing target value at row " + std::to_string(r));
      groups[static_cast<std::size_t>(v)].push_back(r);
    }
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    for (const auto& g : groups) {
      if (g.size() < 2) throw Error(ErrorCode::ClassTooSmall, "a target class has fewer than 2 rows");
    }
  } else {
    groups.emplace_back(static_cast<std::size_t>(n));
    std::iota(groups[0].begin(), groups[0].end(), Eigen::Index{0});
  }

  std::vector<std::int64_t> sizes;
  for (auto& g : groups) {
    rng.shuffle(std::span<Eigen::Index>(g));
    sizes.push_back(static_cast<std::int64_t>(g.size()));
  }
  const std::vector<std::int64_t> test_share = apportion(test_size, sizes);
  std::vector<std::int64_t> remaining(sizes.size());
  for (std::size_t g = 0; g < sizes.size(); ++g) remaining[g] = sizes[g] - test_share[g];
  const std::vector<std::int64_t> val_share = apportion(val_size, remaining);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& rows = groups[g];
    const auto t = static_cast<std::size_t>(test_share[g]);
    const auto v = static_cast<std::size_t>(val_share[g]);
    result.test_indices.insert(result.test_indices.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(t));
    result.val_indices.insert(result.val_indices.end(), rows.begin() + static_cast<std::ptrdiff_t>(t),
                              rows.begin() + static_cast<std::ptrdiff_t>(t + v));
    result.ref_indices.insert(result.ref_indices.end(), rows.begin() + static_cast<std::ptrdiff_t>(t + v), rows.end());
  }
  std::sort(result.ref_indices.begin(), result.ref_indices.end());
  std::sort(result.val_indices.begin(), result.val_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());
  // ref keeps a shuffled order: any prefix of it is a uniform subsample.
  rng.shuffle(std::span<Eigen::Index>(result.ref_indices));
  return result;
}

SplitTables apply_split(const Table& table, const DataSplit& s) {
  return SplitTables{table.select_rows(s.ref_indices), table.select_rows(s.val_indices),
                     table.select_rows(s.test_indices)};
}

}  // namespace structfid
