#include "structfid/table.hpp"

#include <cmath>
#include <string>

#include "structfid/error.hpp"

namespace structfid {

int Schema::index_of(const std::string& name) const {
  for (int c = 0; c < size(); ++c) {
    if (columns[static_cast<std::size_t>(c)].name == name) return c;
  }
  return -1;
}

Table::Table(Schema schema, Eigen::MatrixXd values) : schema_(std::move(schema)), values_(std::move(values)) {
  if (values_.cols() != schema_.size()) {
    throw Error(ErrorCode::SchemaMismatch, "value matrix has " + std::to_string(values_.cols()) + " columns, schema " +
                                               std::to_string(schema_.size()));
  }
  if (schema_.size() < 2) throw Error(ErrorCode::SchemaMismatch, "a table needs at least two columns");
  if (schema_.target_index < 0 || schema_.target_index >= schema_.size()) {
    throw Error(ErrorCode::SchemaMismatch, "target index out of range");
  }
  for (int c = 0; c < schema_.size(); ++c) {
    const Column& column = schema_.columns[static_cast<std::size_t>(c)];
    if (column.categorical() && column.categories.empty()) {
      throw Error(ErrorCode::SchemaMismatch, "categorical column '" + column.name + "' has no categories");
    }
    for (Eigen::Index r = 0; r < values_.rows(); ++r) {
      const double v = values_(r, c);
      if (std::isnan(v)) continue;
      if (column.categorical()) {
        if (v < 0 || v >= column.category_count() || v != std::floor(v)) {
          throw Error(ErrorCode::UnknownCategory, "column '" + column.name + "' row " + std::to_string(r) +
                                                      " holds invalid category index " + std::to_string(v));
        }
      } else if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteValue, "column '" + column.name + "' row " + std::to_string(r));
      }
    }
  }
}

bool Table::has_missing() const { return values_.hasNaN(); }

Table Table::select_rows(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
  Table t;
  t.schema_ = schema_;
  t.values_ = std::move(out);
  return t;
}

Table Table::head(Eigen::Index n) const {
  Table t;
  t.schema_ = schema_;
  t.values_ = values_.topRows(n);
  return t;
}

std::vector<int> Table::category_codes(int c) const {
  std::vector<int> codes(static_cast<std::size_t>(rows()));
  for (Eigen::Index r = 0; r < rows(); ++r) {
    const double v = values_(r, c);
    codes[static_cast<std::size_t>(r)] = std::isnan(v) ? -1 : static_cast<int>(v);
  }
  return codes;
}

bool operator==(const Table& a, const Table& b) {
  if (!(a.schema_ == b.schema_) || a.values_.rows() != b.values_.rows()) return false;
  // NaN cells compare equal to each other here.
  for (Eigen::Index r = 0; r < a.values_.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.values_.cols(); ++c) {
      const double x = a.values_(r, c);
      const double y = b.values_(r, c);
      if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
  }
  return true;
}

void require_same_schema(const Table& a, const Table& b) {
  if (!(a.schema() == b.schema())) throw Error(ErrorCode::SchemaMismatch, "tables do not share a schema");
}

}  // namespace structfid
