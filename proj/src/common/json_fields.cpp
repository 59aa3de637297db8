#include "magclimb/common/json_fields.hpp"

#include <algorithm>

#include "magclimb/common/io.hpp"

namespace magclimb::json_fields {

void expect_object(const json& obj, std::string_view path) {
  if (!obj.is_object()) {
    throw ConfigError("field '" + std::string(path.empty() ? "<root>" : path) + "': expected an object");
  }
}

void reject_unknown(const json& obj, std::string_view path, std::initializer_list<std::string_view> allowed) {
  expect_object(obj, path);
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("field '" + std::string(path) + key + "': unknown field");
    }
  }
}

json parse(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON (" + e.what() + ")");
  }
}

json load_file(const std::string& path) { return parse(io::read_text(path), path); }

}  // namespace magclimb::json_fields
