#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ftvs/types.hpp"

namespace ftvs {

/// Value of the TOML subset: numbers (stored as double), booleans, basic
/// strings and arrays of values (nesting allowed).
struct ConfigValue {
  using Array = std::vector<ConfigValue>;
  std::variant<double, bool, std::string, Array> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

/// Parsed document. Keys are fully qualified: "table.key".
///
/// Grammar: `# comment`, `[table]` / `[table.sub]` headers, and
/// `key = value` pairs where value is a number, `true`/`false`, a
/// double-quoted string (\" \\ \n \t escapes) or a bracketed array that may
/// span lines. Duplicate keys are errors.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in, const std::string& origin = "<stream>");
  static ConfigDocument load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const ConfigValue& at(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> string(const std::string& key) const;
  Vec3 vec3_or(const std::string& key, const Vec3& fallback) const;
  Vec4 vec4_or(const std::string& key, const Vec4& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Array of numeric arrays, e.g. [[0, 10], [20, 25]].
  std::vector<std::vector<double>> number_rows(const std::string& key) const;

  /// Keys that were never read through an accessor.
  std::vector<std::string> unused_keys() const;
  const std::string& origin() const { return origin_; }
  const std::map<std::string, ConfigValue>& values() const { return values_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  std::map<std::string, ConfigValue> values_;
  mutable std::map<std::string, bool> used_;
  std::string origin_;
};

}  // namespace ftvs
