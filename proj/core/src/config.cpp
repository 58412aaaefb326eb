#include "ftvs/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ftvs {

namespace {

class Parser {
 public:
  Parser(std::istream& in, std::string origin) : origin_(std::move(origin)) {
    std::ostringstream ss;
    ss << in.rdbuf();
    text_ = ss.str();
  }

  std::map<std::string, ConfigValue> run() {
    std::map<std::string, ConfigValue> out;
    std::string table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_inline_ws();
        table = parse_key();
        skip_inline_ws();
        expect(']');
        end_of_line();
        continue;
      }
      const int key_line = line_;
      std::string key = parse_key();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      ConfigValue v = parse_value();
      v.line = key_line;
      end_of_line();
      const std::string full = table.empty() ? key : table + "." + key;
      if (out.count(full)) error(key_line, "duplicate key '" + full + "'");
      out.emplace(full, std::move(v));
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  [[noreturn]] void error(int line, const std::string& what) const {
    std::ostringstream os;
    os << origin_ << ':' << line << ": " << what;
    throw ConfigError(os.str());
  }
  [[noreturn]] void error(const std::string& what) const { error(line_, what); }

  void expect(char c) {
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        return;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_ws() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        return;
      }
    }
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') error("unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }

  std::string parse_key() {
    const std::size_t start = pos_;
    while (!eof() && key_char(peek())) ++pos_;
    if (pos_ == start) error("expected a key");
    std::string k = text_.substr(start, pos_ - start);
    if (k.front() == '.' || k.back() == '.' || k.find("..") != std::string::npos) {
      error("malformed dotted key '" + k + "'");
    }
    return k;
  }

  ConfigValue parse_value() {
    ConfigValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.data = parse_string();
    } else if (c == '[') {
      v.data = parse_array();
    } else if (text_.compare(pos_, 4, "true") == 0 && !key_char(at(pos_ + 4))) {
      pos_ += 4;
      v.data = true;
    } else if (text_.compare(pos_, 5, "false") == 0 && !key_char(at(pos_ + 5))) {
      pos_ += 5;
      v.data = false;
    } else {
      v.data = parse_number();
    }
    return v;
  }

  char at(std::size_t i) const { return i < text_.size() ? text_[i] : '\0'; }

  std::string parse_string() {
    expect('"');
    std::string s;
    while (true) {
      if (eof() || peek() == '\n') error("unterminated string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) error("unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          default: error(std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        s += c;
      }
    }
    return s;
  }

  ConfigValue::Array parse_array() {
    expect('[');
    ConfigValue::Array arr;
    skip_array_ws();
    if (peek() == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      skip_array_ws();
      arr.push_back(parse_value());
      skip_array_ws();
      if (peek() == ',') {
        ++pos_;
        skip_array_ws();
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      error("expected ',' or ']' in array");
    }
  }

  double parse_number() {
    std::size_t start = pos_;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
          c == '_') {
        ++pos_;
      } else {
        break;
      }
    }
    std::string tok = text_.substr(start, pos_ - start);
    if (tok.empty()) error("expected a value");
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    if (clean == "inf" || clean == "+inf") return std::numeric_limits<double>::infinity();
    if (clean == "-inf") return -std::numeric_limits<double>::infinity();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(clean.c_str(), &end);
    if (end != clean.c_str() + clean.size() || errno == ERANGE || clean == "nan") {
      error("invalid number '" + tok + "'");
    }
    return v;
  }

  std::string text_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

ConfigDocument ConfigDocument::parse(std::istream& in, const std::string& origin) {
  ConfigDocument doc;
  doc.origin_ = origin;
  doc.values_ = Parser(in, origin).run();
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  return parse(in, path);
}

void ConfigDocument::fail(const std::string& key, const std::string& what) const {
  std::ostringstream os;
  os << origin_;
  auto it = values_.find(key);
  if (it != values_.end()) os << ':' << it->second.line;
  os << ": " << key << ": " << what;
  throw ConfigError(os.str());
}

const ConfigValue& ConfigDocument::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(key, "missing required key");
  used_[key] = true;
  return it->second;
}

double ConfigDocument::number(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (!v.is_number()) fail(key, "expected a number");
  return std::get<double>(v.data);
}

double ConfigDocument::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

bool ConfigDocument::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (!v.is_bool()) fail(key, "expected true or false");
  return std::get<bool>(v.data);
}

std::optional<std::string> ConfigDocument::string(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const ConfigValue& v = at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return std::get<std::string>(v.data);
}

std::string ConfigDocument::string_or(const std::string& key, const std::string& fallback) const {
  auto s = string(key);
  return s ? *s : fallback;
}

std::vector<double> ConfigDocument::numbers(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : std::get<ConfigValue::Array>(v.data)) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(std::get<double>(e.data));
  }
  return out;
}

std::vector<std::vector<double>> ConfigDocument::number_rows(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : std::get<ConfigValue::Array>(v.data)) {
    if (!row.is_array()) fail(key, "expected an array of arrays");
    std::vector<double> r;
    for (const auto& e : std::get<ConfigValue::Array>(row.data)) {
      if (!e.is_number()) fail(key, "expected numeric entries");
      r.push_back(std::get<double>(e.data));
    }
    out.push_back(std::move(r));
  }
  return out;
}

Vec3 ConfigDocument::vec3_or(const std::string& key, const Vec3& fallback) const {
  if (!has(key)) return fallback;
  const auto v = numbers(key);
  if (v.size() != 3) fail(key, "expected exactly 3 numbers");
  return {v[0], v[1], v[2]};
}

Vec4 ConfigDocument::vec4_or(const std::string& key, const Vec4& fallback) const {
  if (!has(key)) return fallback;
  const auto v = numbers(key);
  if (v.size() != 4) fail(key, "expected exactly 4 numbers");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<std::string> ConfigDocument::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

}  // namespace ftvs
