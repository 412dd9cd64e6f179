#include "structfid/preprocess.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "structfid/error.hpp"

namespace structfid {

Eigen::Index Preprocessor::encoded_width(std::span<const int> columns) const {
  Eigen::Index width = 0;
  for (int c : columns) {
    const Column& column = schema.columns[static_cast<std::size_t>(c)];
    width += column.categorical() ? column.category_count() : 1;
  }
  return width;
}

Preprocessor fit_preprocessor(const Table& ref) {
  if (ref.rows() == 0) throw Error(ErrorCode::EmptyTable, "cannot fit a preprocessor on an empty table");
  const int cols = ref.cols();
  Preprocessor p;
  p.schema = ref.schema();
  p.mean = Eigen::VectorXd::Zero(cols);
  p.stddev = Eigen::VectorXd::Ones(cols);
  p.mode.assign(static_cast<std::size_t>(cols), -1);

  for (int c = 0; c < cols; ++c) {
    const auto column = ref.col(c);
    if (ref.is_categorical(c)) {
      std::vector<Eigen::Index> counts(static_cast<std::size_t>(ref.column(c).category_count()), 0);
      for (Eigen::Index r = 0; r < column.size(); ++r) {
        if (!std::isnan(column(r))) ++counts[static_cast<std::size_t>(column(r))];
      }
      int best = 0;
      for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
      }
      p.mode[static_cast<std::size_t>(c)] = best;
      continue;
    }
    const auto observed = column.array().isNaN().select(0.0, column.array());
    const auto count = static_cast<double>((!column.array().isNaN()).count());
    if (count == 0) continue;
    const double mean = observed.sum() / count;
    p.mean(c) = mean;
    if (count < 2) continue;
    const double ss = column.array().isNaN().select(0.0, column.array() - mean).square().sum();
    const double sd = std::sqrt(ss / (count - 1.0));
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) p.stddev(c) = sd;
  }
  return p;
}

Table apply_preprocessor(const Preprocessor& p, const Table& t) {
  if (t.cols() != p.schema.size()) throw Error(ErrorCode::SchemaMismatch, "column count differs from fitted schema");
  Eigen::MatrixXd out(t.rows(), t.cols());
  for (int c = 0; c < t.cols(); ++c) {
    const Column& fitted = p.schema.columns[static_cast<std::size_t>(c)];
    const Column& given = t.column(c);
    if (fitted.name != given.name || fitted.kind != given.kind) {
      throw Error(ErrorCode::SchemaMismatch, "column '" + given.name + "' does not match fitted column '" +
                                                 fitted.name + "'");
    }
    if (fitted.categorical()) {
      std::unordered_map<std::string, int> fitted_index;
      for (int k = 0; k < fitted.category_count(); ++k) fitted_index.emplace(fitted.categories[k], k);
      std::vector<int> remap(given.categories.size(), -1);
      for (std::size_t k = 0; k < given.categories.size(); ++k) {
        const auto it = fitted_index.find(given.categories[k]);
        if (it != fitted_index.end()) remap[k] = it->second;
      }
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        const double v = t(r, c);
        if (std::isnan(v)) {
          out(r, c) = p.mode[static_cast<std::size_t>(c)];
          continue;
        }
        const int mapped = remap[static_cast<std::size_t>(v)];
        if (mapped < 0) {
          throw Error(ErrorCode::UnknownCategory, "category '" + given.categories[static_cast<std::size_t>(v)] +
                                                      "' of column '" + given.name + "' unseen at fit time");
        }
        out(r, c) = mapped;
      }
    } else {
      const double mean = p.mean(c);
      const double sd = p.stddev(c);
      out.col(c) = t.col(c).unaryExpr([mean, sd](double v) { return std::isnan(v) ? 0.0 : (v - mean) / sd; });
    }
  }
  Schema schema = p.schema;
  schema.target_index = t.target_index();
  return Table(std::move(schema), std::move(out));
}

Table invert_preprocessor(const Preprocessor& p, const Table& transformed) {
  Eigen::MatrixXd out = transformed.values();
  for (int c = 0; c < transformed.cols(); ++c) {
    if (!transformed.is_categorical(c)) out.col(c) = out.col(c).array() * p.stddev(c) + p.mean(c);
  }
  return transformed.with_values(std::move(out));
}

Eigen::MatrixXd encode(const Preprocessor& p, const Table& transformed, std::span<const int> columns) {
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(transformed.rows(), p.encoded_width(columns));
  Eigen::Index offset = 0;
  for (int c : columns) {
    const Column& column = p.schema.columns[static_cast<std::size_t>(c)];
    if (column.categorical()) {
      for (Eigen::Index r = 0; r < transformed.rows(); ++r) {
        design(r, offset + static_cast<Eigen::Index>(transformed(r, c))) = 1.0;
      }
      offset += column.category_count();
    } else {
      design.col(offset) = transformed.col(c);
      ++offset;
    }
  }
  return design;
}

std::vector<int> all_columns_except(int column_count, int excluded) {
  std::vector<int> out;
  for (int c = 0; c < column_count; ++c) {
    if (c != excluded) out.push_back(c);
  }
  return out;
}

}  // namespace structfid
