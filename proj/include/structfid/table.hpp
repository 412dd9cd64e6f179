#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace structfid {

enum class ColumnKind { Categorical, Numerical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  std::vector<std::string> categories;  // categorical only

  bool categorical() const noexcept { return kind == ColumnKind::Categorical; }
  int category_count() const noexcept { return static_cast<int>(categories.size()); }

  friend bool operator==(const Column&, const Column&) = default;
};

struct Schema {
  std::vector<Column> columns;
  int target_index = -1;

  int size() const noexcept { return static_cast<int>(columns.size()); }
  int index_of(const std::string& name) const;  // -1 when absent

  friend bool operator==(const Schema&, const Schema&) = default;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Typed tabular dataset. Cells live in a dense double matrix: categorical
/// cells hold the category index, missing cells hold NaN.
class Table {
 public:
  Table() = default;
  Table(Schema schema, Eigen::MatrixXd values);

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<Column>& columns() const noexcept { return schema_.columns; }
  const Column& column(int c) const { return schema_.columns.at(static_cast<std::size_t>(c)); }
  int target_index() const noexcept { return schema_.target_index; }

  Eigen::Index rows() const noexcept { return values_.rows(); }
  int cols() const noexcept { return schema_.size(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(Eigen::Index r, int c) const { return values_(r, c); }
  auto col(int c) const { return values_.col(c); }

  bool is_categorical(int c) const { return column(c).categorical(); }
  bool has_missing() const;

  Table select_rows(std::span<const Eigen::Index> rows) const;
  Table head(Eigen::Index n) const;
  Table with_values(Eigen::MatrixXd values) const { return Table(schema_, std::move(values)); }

  /// Integer class labels of a categorical column (missing cells map to -1).
  std::vector<int> category_codes(int c) const;

  friend bool operator==(const Table& a, const Table& b);

 private:
  Schema schema_;
  Eigen::MatrixXd values_;
};

/// Throws SchemaMismatch unless both tables share column names, kinds,
/// category lists and target.
void require_same_schema(const Table& a, const Table& b);

}  // namespace structfid
