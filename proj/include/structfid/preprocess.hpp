#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "structfid/table.hpp"

namespace structfid {

/// Column statistics fitted on a reference table: mean and sample std for
/// numerical columns (std of constant columns is stored as 1), mode for
/// categorical columns (ties to the lowest category index).
struct Preprocessor {
  Schema schema;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<int> mode;  // -1 for numerical columns

  /// Width of the one-hot/z-score encoding of `columns`.
  Eigen::Index encoded_width(std::span<const int> columns) const;
};

/// Throws EmptyTable.
Preprocessor fit_preprocessor(const Table& ref);

/// Imputes missing cells (mean / mode) and z-scores numerical columns with the
/// fitted statistics. Categorical cells stay category indices, remapped by label
/// onto the fitted category list. Throws SchemaMismatch or UnknownCategory.
Table apply_preprocessor(const Preprocessor& p, const Table& t);

/// Undoes the z-score of numerical columns of a transformed table.
Table invert_preprocessor(const Preprocessor& p, const Table& transformed);

/// Design matrix over `columns` of a transformed table: numerical columns as
/// they are, categorical columns one-hot over the full category list.
Eigen::MatrixXd encode(const Preprocessor& p, const Table& transformed, std::span<const int> columns);

/// All column indices except `excluded`.
std::vector<int> all_columns_except(int column_count, int excluded);

}  // namespace structfid
