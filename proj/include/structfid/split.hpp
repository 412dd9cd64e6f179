#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "structfid/table.hpp"

namespace structfid {

struct DataSplit {
  std::vector<Eigen::Index> ref_indices;
  std::vector<Eigen::Index> val_indices;
  std::vector<Eigen::Index> test_indices;
  std::uint64_t seed = 0;
  int repeat_id = 0;
};

struct SplitFractions {
  double test = 0.2;        // of all rows
  double validation = 0.1;  // of the rows left after the test split
};

/// Largest-remainder apportionment of `total` proportional to `weights`;
/// ties in the fractional part go to the lower index.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights);

/// |test| = floor(0.2 n), |val| = floor(0.1 (n - |test|)), ref takes the rest.
/// Categorical targets are stratified per class; numerical targets are shuffled.
/// Throws TooFewRows (n < 10) and ClassTooSmall (a class with fewer than 2 rows).
DataSplit split(const Table& table, std::uint64_t seed, int repeat_id, const SplitFractions& fractions = {});

struct SplitTables {
  Table ref;
  Table val;
  Table test;
};

SplitTables apply_split(const Table& table, const DataSplit& split);

}  // namespace structfid
