#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vignette {

/// Value in a parsed config file. Integers coerce to double on request so
/// "x = 1" satisfies a float-typed setting; no other coercions happen.
struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string> value;
  int line = 0;

  bool as_bool(const std::string& key) const;
  std::int64_t as_int(const std::string& key) const;
  double as_double(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
};

struct TomlTable {
  std::map<std::string, TomlValue> entries;

  const TomlValue* find(const std::string& key) const;
};

/// Parse result: keys before any header land in `root`, `[name]` headers in
/// `tables`, and each `[[name]]` block appends to `arrays[name]`.
struct TomlDocument {
  TomlTable root;
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> arrays;
};

/// Parses the config subset of TOML: `[table]` and `[[array-of-tables]]`
/// headers with bare dotted names, `key = value` lines with quoted strings
/// (\" \\ \n \t \r escapes), booleans, integers (underscore separators
/// allowed) and floats, and `#` comments. Errors carry `origin` and the
/// 1-based line number.
TomlDocument parse_toml(std::string_view text, std::string_view origin = "<config>");

}  // namespace vignette
