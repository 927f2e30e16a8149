#include "vignette/toml.hpp"

#include <cctype>
#include <charconv>
#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void syntax_error(std::string_view origin, int line, std::string_view what) {
  fail(fmt::format("{}:{}: {}", origin, line, what));
}

bool valid_name(std::string_view name, bool allow_dots) {
  if (name.empty() || name.front() == '.' || name.back() == '.') return false;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                    (allow_dots && c == '.');
    if (!ok) return false;
  }
  return true;
}

// Underscores are digit-group separators: valid only between two digits.
std::string strip_separators(std::string_view token, std::string_view origin, int line) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] != '_') {
      out.push_back(token[i]);
      continue;
    }
    const bool between_digits = i > 0 && i + 1 < token.size() &&
                                std::isdigit(static_cast<unsigned char>(token[i - 1])) &&
                                std::isdigit(static_cast<unsigned char>(token[i + 1]));
    if (!between_digits) syntax_error(origin, line, "misplaced digit separator '_'");
  }
  return out;
}

TomlValue parse_scalar(std::string_view raw, std::string_view origin, int line) {
  TomlValue v;
  v.line = line;
  if (!raw.empty() && raw.front() == '"') {
    std::string s;
    std::size_t i = 1;
    for (; i < raw.size() && raw[i] != '"'; ++i) {
      char c = raw[i];
      if (c == '\\') {
        if (++i == raw.size()) syntax_error(origin, line, "dangling escape in string");
        switch (raw[i]) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          default: syntax_error(origin, line, fmt::format("unknown escape \\{}", raw[i]));
        }
      }
      s.push_back(c);
    }
    if (i == raw.size()) syntax_error(origin, line, "unterminated string");
    const std::string_view rest = trim(raw.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') {
      syntax_error(origin, line, "trailing characters after string value");
    }
    v.value = std::move(s);
    return v;
  }

  // Unquoted: drop any trailing comment, then try bool, integer, float.
  std::string_view token = raw;
  if (const auto hash = token.find('#'); hash != std::string_view::npos) {
    token = token.substr(0, hash);
  }
  token = trim(token);
  if (token.empty()) syntax_error(origin, line, "missing value");
  if (token == "true") {
    v.value = true;
    return v;
  }
  if (token == "false") {
    v.value = false;
    return v;
  }
  const std::string cleaned = strip_separators(token, origin, line);
  std::string_view num = cleaned;
  if (!num.empty() && num.front() == '+') num.remove_prefix(1);

  std::int64_t integer = 0;
  auto [iptr, ierr] = std::from_chars(num.data(), num.data() + num.size(), integer);
  if (ierr == std::errc{} && iptr == num.data() + num.size()) {
    v.value = integer;
    return v;
  }
  double floating = 0.0;
  auto [fptr, ferr] = std::from_chars(num.data(), num.data() + num.size(), floating);
  if (ferr == std::errc{} && fptr == num.data() + num.size()) {
    v.value = floating;
    return v;
  }
  syntax_error(origin, line, fmt::format("cannot parse value '{}'", token));
}

}  // namespace

bool TomlValue::as_bool(const std::string& key) const {
  if (const bool* b = std::get_if<bool>(&value)) return *b;
  fail(fmt::format("'{}' (line {}) must be true or false", key, line));
}

std::int64_t TomlValue::as_int(const std::string& key) const {
  if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) return *i;
  fail(fmt::format("'{}' (line {}) must be an integer", key, line));
}

double TomlValue::as_double(const std::string& key) const {
  if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
    return static_cast<double>(*i);
  }
  if (const double* d = std::get_if<double>(&value)) return *d;
  fail(fmt::format("'{}' (line {}) must be a number", key, line));
}

const std::string& TomlValue::as_string(const std::string& key) const {
  if (const std::string* s = std::get_if<std::string>(&value)) return *s;
  fail(fmt::format("'{}' (line {}) must be a quoted string", key, line));
}

const TomlValue* TomlTable::find(const std::string& key) const {
  const auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

TomlDocument parse_toml(std::string_view text, std::string_view origin) {
  TomlDocument doc;
  TomlTable* current = &doc.root;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) syntax_error(origin, line_no, "unterminated [[header]]");
      const std::string name{trim(line.substr(2, line.size() - 4))};
      if (!valid_name(name, true)) {
        syntax_error(origin, line_no, fmt::format("bad table name '{}'", name));
      }
      current = &doc.arrays[name].emplace_back();
      continue;
    }
    if (line.front() == '[') {
      if (!line.ends_with(']')) syntax_error(origin, line_no, "unterminated [header]");
      const std::string name{trim(line.substr(1, line.size() - 2))};
      if (!valid_name(name, true)) {
        syntax_error(origin, line_no, fmt::format("bad table name '{}'", name));
      }
      const auto [it, inserted] = doc.tables.try_emplace(name);
      if (!inserted) syntax_error(origin, line_no, fmt::format("table [{}] redefined", name));
      current = &it->second;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      syntax_error(origin, line_no, "expected 'key = value'");
    }
    const std::string key{trim(line.substr(0, eq))};
    if (!valid_name(key, false)) {
      syntax_error(origin, line_no, fmt::format("bad key '{}'", key));
    }
    if (current->entries.contains(key)) {
      syntax_error(origin, line_no, fmt::format("key '{}' redefined", key));
    }
    current->entries.emplace(key, parse_scalar(trim(line.substr(eq + 1)), origin, line_no));
  }
  return doc;
}

}  // namespace vignette
