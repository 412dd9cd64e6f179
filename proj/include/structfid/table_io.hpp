#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "structfid/table.hpp"

namespace structfid {

/// Sidecar schema: {"columns":[{"name","kind","categories"?}], "target":"<column name>"}.
Schema schema_from_json(std::string_view text);
std::string schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

/// CSV with a header row. Numerical cells are decimal reals, categorical cells
/// are category labels, an empty field is a missing value. Columns are matched
/// to the schema by header name. Throws Parse, SchemaMismatch or UnknownCategory.
Table table_from_csv(std::string_view text, const Schema& schema);
Table load_table(const std::filesystem::path& csv, const Schema& schema);

/// Writes numbers in shortest round-trip form, so read(write(t)) == t.
std::string table_to_csv(const Table& table);
void save_table(const std::filesystem::path& csv, const Table& table);

}  // namespace structfid
