#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "structfid/error.hpp"

namespace structfid::detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << bytes;
}

inline nlohmann::json parse_json(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, what + ": " + e.what());
  }
}

/// Rejects object members outside `allowed`.
inline void require_fields(const nlohmann::json& object, const std::set<std::string>& allowed,
                           const std::string& where, ErrorCode code) {
  if (!object.is_object()) throw Error(code, where + " must be an object");
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) throw Error(code, where + ": unknown field '" + item.key() + "'");
  }
}

template <typename T>
T get_as(const nlohmann::json& value, const std::string& where, ErrorCode code) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(code, where + ": " + e.what());
  }
}

}  // namespace structfid::detail
