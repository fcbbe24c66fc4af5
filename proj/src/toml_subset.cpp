#include "graphflow/toml_subset.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "graphflow/error.hpp"

namespace graphflow {

namespace {

class LineParser {
 public:
  LineParser(const std::string& s, int line) : s_(s), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, static_cast<int>(pos_) + 1); }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_space();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  std::string key() {
    skip_space();
    if (peek() == '"') return quoted();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  std::string quoted() {
    const char q = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != q) {
      char c = s_[pos_++];
      if (c == '\\' && q == '"') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n':
            c = '\n';
            break;
          case 't':
            c = '\t';
            break;
          case '\\':
          case '"':
            c = e;
            break;
          default:
            fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  TomlValue value() {
    TomlValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"' || c == '\'') {
      v.kind = TomlValue::Kind::string;
      v.text = quoted();
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = TomlValue::Kind::array;
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        TomlValue item = value();
        if (item.kind == TomlValue::Kind::array) fail("nested arrays are not supported");
        v.items.push_back(std::move(item));
        const char d = peek();
        if (d == ',') {
          ++pos_;
          if (peek() == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (d == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']' in array");
      }
    }
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      v.kind = TomlValue::Kind::boolean;
      v.boolean = true;
      return v;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      v.kind = TomlValue::Kind::boolean;
      return v;
    }
    // TOML numbers, underscores allowed between digits.
    std::string digits;
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_')) {
      if (s_[pos_] != '_') digits += s_[pos_];
      ++pos_;
    }
    if (digits.empty()) {
      pos_ = start;
      fail("expected a value");
    }
    if (digits == "inf" || digits == "+inf") {
      v.number = HUGE_VAL;
    } else if (digits == "-inf") {
      v.number = -HUGE_VAL;
    } else {
      char* end = nullptr;
      v.number = std::strtod(digits.c_str(), &end);
      if (end != digits.c_str() + digits.size() || digits == "nan") {
        pos_ = start;
        fail("malformed number '" + digits + "'");
      }
    }
    v.kind = TomlValue::Kind::number;
    return v;
  }

  std::size_t pos_ = 0;

 private:
  const std::string& s_;
  int line_;
};

const char* kind_name(TomlValue::Kind k) {
  switch (k) {
    case TomlValue::Kind::string:
      return "string";
    case TomlValue::Kind::number:
      return "number";
    case TomlValue::Kind::boolean:
      return "boolean";
    case TomlValue::Kind::array:
      return "array";
  }
  return "?";
}

}  // namespace

TomlDocument TomlDocument::parse(const std::string& text, const std::string& origin) {
  TomlDocument doc;
  doc.origin_ = origin;
  doc.sections_[""];
  std::string section;
  std::set<std::string> declared{""};
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineParser p(line, number);
    if (p.at_end_or_comment()) continue;
    if (p.peek() == '[') {
      ++p.pos_;
      section = p.key();
      if (p.peek() != ']') p.fail("expected ']' after section name");
      ++p.pos_;
      if (!p.at_end_or_comment()) p.fail("unexpected text after section header");
      if (!declared.insert(section).second) p.fail("duplicate section [" + section + "]");
      doc.sections_[section];
      continue;
    }
    const std::string key = p.key();
    if (p.peek() != '=') p.fail("expected '=' after key '" + key + "'");
    ++p.pos_;
    TomlValue v = p.value();
    if (!p.at_end_or_comment()) p.fail("unexpected text after value");
    auto& entries = doc.sections_[section];
    for (const auto& e : entries)
      if (e.first == key) p.fail("duplicate key '" + key + "'");
    entries.emplace_back(key, std::move(v));
  }
  return doc;
}

bool TomlDocument::has_section(const std::string& section) const { return sections_.count(section) > 0; }

const TomlValue* TomlDocument::find(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return nullptr;
  for (const auto& e : it->second) {
    if (e.first == key) {
      used_.insert({section, key});
      return &e.second;
    }
  }
  return nullptr;
}

bool TomlDocument::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  for (const auto& e : it->second)
    if (e.first == key) return true;
  return false;
}

void TomlDocument::type_error(const std::string& section, const std::string& key, const char* expected) const {
  const TomlValue* v = find(section, key);
  throw ConfigError(origin_ + ":" + std::to_string(v ? v->line : 0) + ": [" + section + "] " + key + " must be a " +
                    expected + (v ? std::string(", got a ") + kind_name(v->kind) : std::string()));
}

std::string TomlDocument::get_string(const std::string& section, const std::string& key) const {
  const TomlValue* v = find(section, key);
  if (!v) throw ConfigError(origin_ + ": missing key [" + section + "] " + key);
  if (v->kind == TomlValue::Kind::number) {
    std::ostringstream os;
    os.precision(17);
    os << v->number;
    return os.str();
  }
  if (v->kind != TomlValue::Kind::string) type_error(section, key, "string");
  return v->text;
}

std::string TomlDocument::get_string(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double TomlDocument::get_number(const std::string& section, const std::string& key) const {
  const TomlValue* v = find(section, key);
  if (!v) throw ConfigError(origin_ + ": missing key [" + section + "] " + key);
  if (v->kind != TomlValue::Kind::number) type_error(section, key, "number");
  return v->number;
}

double TomlDocument::get_number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_number(section, key) : fallback;
}

long TomlDocument::get_integer(const std::string& section, const std::string& key, long fallback) const {
  if (!has(section, key)) return fallback;
  const double x = get_number(section, key);
  if (x != std::floor(x) || std::abs(x) > 1e15) type_error(section, key, "integer");
  return static_cast<long>(x);
}

bool TomlDocument::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const TomlValue* v = find(section, key);
  if (!v) return fallback;
  if (v->kind != TomlValue::Kind::boolean) type_error(section, key, "boolean");
  return v->boolean;
}

std::vector<double> TomlDocument::get_numbers(const std::string& section, const std::string& key) const {
  const TomlValue* v = find(section, key);
  if (!v) throw ConfigError(origin_ + ": missing key [" + section + "] " + key);
  if (v->kind == TomlValue::Kind::number) return {v->number};
  if (v->kind != TomlValue::Kind::array) type_error(section, key, "number array");
  std::vector<double> out;
  for (const auto& item : v->items) {
    if (item.kind != TomlValue::Kind::number) type_error(section, key, "number array");
    out.push_back(item.number);
  }
  return out;
}

std::vector<double> TomlDocument::get_numbers(const std::string& section, const std::string& key,
                                              const std::vector<double>& fallback) const {
  return has(section, key) ? get_numbers(section, key) : fallback;
}

std::vector<std::string> TomlDocument::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = sections_.find(section);
  if (it != sections_.end())
    for (const auto& e : it->second) out.push_back(e.first);
  return out;
}

void TomlDocument::reject_unused() const {
  for (const auto& [section, entries] : sections_) {
    for (const auto& e : entries) {
      if (!used_.count({section, e.first})) {
        throw ConfigError(origin_ + ":" + std::to_string(e.second.line) + ": unknown key [" + section + "] " +
                          e.first);
      }
    }
  }
}

}  // namespace graphflow
