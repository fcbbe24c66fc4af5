#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace graphflow {

// Value of a key in the supported TOML subset: strings, numbers, booleans
// and flat arrays of those.
struct TomlValue {
  enum class Kind { string, number, boolean, array };
  Kind kind = Kind::number;
  std::string text;  // string value
  double number = 0.0;
  bool boolean = false;
  std::vector<TomlValue> items;
  int line = 0;
};

// Flat [section] / key = value documents. Keys outside any section live in
// section "". Every lookup marks the key as used so that leftovers can be
// reported as unknown.
class TomlDocument {
 public:
  static TomlDocument parse(const std::string& text, const std::string& origin);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const TomlValue* find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key) const;
  double get_number(const std::string& section, const std::string& key, double fallback) const;
  long get_integer(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_numbers(const std::string& section, const std::string& key) const;
  std::vector<double> get_numbers(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  // Keys of a section in file order.
  std::vector<std::string> keys(const std::string& section) const;

  // Throws ConfigError naming the first key that was never looked up.
  void reject_unused() const;
  const std::string& origin() const { return origin_; }

 private:
  [[noreturn]] void type_error(const std::string& section, const std::string& key, const char* expected) const;

  std::string origin_;
  std::map<std::string, std::vector<std::pair<std::string, TomlValue>>> sections_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace graphflow
