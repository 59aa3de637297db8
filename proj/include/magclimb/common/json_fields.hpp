#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "magclimb/common/errors.hpp"

namespace magclimb::json_fields {

using nlohmann::json;

/// Reads `obj[key]` as T, or returns `fallback` when absent. Type mismatches raise a
/// ConfigError naming the dotted field path.
template <typename T>
T get_or(const json& obj, std::string_view path, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + std::string(path) + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& obj, std::string_view path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("field '" + std::string(path) + key + "': missing");
  try {
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + std::string(path) + key + "': " + e.what());
  }
}

void expect_object(const json& obj, std::string_view path);

/// Rejects keys outside `allowed` so typos in config files surface immediately.
void reject_unknown(const json& obj, std::string_view path, std::initializer_list<std::string_view> allowed);

/// Parses JSON text; syntax errors become ConfigError with line and column.
json parse(std::string_view text, std::string_view source);

json load_file(const std::string& path);

}  // namespace magclimb::json_fields
