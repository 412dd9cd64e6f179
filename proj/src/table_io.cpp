#include "structfid/table_io.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "io_util.hpp"
#include "structfid/error.hpp"

namespace structfid {

using nlohmann::json;

Schema schema_from_json(std::string_view text) {
  constexpr ErrorCode code = ErrorCode::SchemaMismatch;
  const json doc = detail::parse_json(text, "schema");
  detail::require_fields(doc, {"columns", "target"}, "schema", code);
  if (!doc.contains("columns") || !doc.contains("target")) throw Error(code, "schema needs columns and target");
  Schema schema;
  for (const json& item : doc["columns"]) {
    detail::require_fields(item, {"name", "kind", "categories"}, "schema column", code);
    Column column;
    column.name = detail::get_as<std::string>(item.at("name"), "column name", code);
    const auto kind = detail::get_as<std::string>(item.at("kind"), "column kind", code);
    if (kind == "categorical") {
      column.kind = ColumnKind::Categorical;
      column.categories = detail::get_as<std::vector<std::string>>(item.value("categories", json::array()),
                                                                   "categories", code);
    } else if (kind != "numerical") {
      throw Error(code, "column kind must be 'categorical' or 'numerical'");
    }
    schema.columns.push_back(std::move(column));
  }
  const auto target = detail::get_as<std::string>(doc["target"], "target", code);
  schema.target_index = schema.index_of(target);
  if (schema.target_index < 0) throw Error(code, "target column '" + target + "' not in schema");
  return schema;
}

std::string schema_to_json(const Schema& schema) {
  json doc;
  doc["columns"] = json::array();
  for (const Column& c : schema.columns) {
    json item{{"name", c.name}, {"kind", c.categorical() ? "categorical" : "numerical"}};
    if (c.categorical()) item["categories"] = c.categories;
    doc["columns"].push_back(item);
  }
  doc["target"] = schema.columns.at(static_cast<std::size_t>(schema.target_index)).name;
  return doc.dump(2) + "\n";
}

Schema load_schema(const std::filesystem::path& path) { return schema_from_json(detail::read_file(path)); }

namespace {

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !record.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        field_started = false;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::Parse, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string quote_if_needed(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

}  // namespace

Table table_from_csv(std::string_view text, const Schema& schema) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto records = parse_csv_records(text);
  if (records.empty()) throw Error(ErrorCode::Parse, "CSV has no header row");
  const auto& header = records.front();
  if (static_cast<int>(header.size()) != schema.size()) {
    throw Error(ErrorCode::SchemaMismatch, "CSV has " + std::to_string(header.size()) + " columns, schema " +
                                               std::to_string(schema.size()));
  }
  std::vector<int> column_of_field(header.size());
  for (std::size_t f = 0; f < header.size(); ++f) {
    column_of_field[f] = schema.index_of(header[f]);
    if (column_of_field[f] < 0) throw Error(ErrorCode::SchemaMismatch, "CSV column '" + header[f] + "' not in schema");
  }

  std::vector<std::unordered_map<std::string, int>> label_index(static_cast<std::size_t>(schema.size()));
  for (int c = 0; c < schema.size(); ++c) {
    const Column& column = schema.columns[static_cast<std::size_t>(c)];
    for (int k = 0; k < column.category_count(); ++k) label_index[c].emplace(column.categories[k], k);
  }

  const auto rows = static_cast<Eigen::Index>(records.size() - 1);
  Eigen::MatrixXd values(rows, schema.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& record = records[static_cast<std::size_t>(r) + 1];
    if (record.size() != header.size()) {
      throw Error(ErrorCode::Parse, "CSV line " + std::to_string(r + 2) + " has " + std::to_string(record.size()) +
                                        " fields");
    }
    for (std::size_t f = 0; f < record.size(); ++f) {
      const int c = column_of_field[f];
      const std::string& cell = record[f];
      if (cell.empty()) {
        values(r, c) = kMissing;
        continue;
      }
      if (schema.columns[static_cast<std::size_t>(c)].categorical()) {
        const auto it = label_index[c].find(cell);
        if (it == label_index[c].end()) {
          throw Error(ErrorCode::UnknownCategory, "label '" + cell + "' in column '" + header[f] + "'");
        }
        values(r, c) = it->second;
      } else {
        double v = 0.0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        while (first < last && *first == ' ') ++first;
        if (first < last && *first == '+') ++first;
        const auto result = std::from_chars(first, last, v);
        if (result.ec != std::errc() || result.ptr != last || !std::isfinite(v)) {
          throw Error(ErrorCode::Parse, "non-numeric cell '" + cell + "' in column '" + header[f] + "'");
        }
        values(r, c) = v;
      }
    }
  }
  return Table(schema, std::move(values));
}

Table load_table(const std::filesystem::path& csv, const Schema& schema) {
  return table_from_csv(detail::read_file(csv), schema);
}

std::string table_to_csv(const Table& table) {
  std::string out;
  for (int c = 0; c < table.cols(); ++c) {
    if (c > 0) out.push_back(',');
    out += quote_if_needed(table.column(c).name);
  }
  out.push_back('\n');
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (int c = 0; c < table.cols(); ++c) {
      if (c > 0) out.push_back(',');
      const double v = table(r, c);
      if (std::isnan(v)) continue;
      if (table.is_categorical(c)) {
        out += quote_if_needed(table.column(c).categories[static_cast<std::size_t>(v)]);
      } else {
        out += format_double(v);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void save_table(const std::filesystem::path& csv, const Table& table) { detail::write_file(csv, table_to_csv(table)); }

}  // namespace structfid
