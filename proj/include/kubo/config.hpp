#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kubo {

// Plain-text run configuration: "key = value" lines grouped under [table] /
// [table.subtable] headers. Values: bool, integer, float, "string", and
// (nested) arrays. Keys are addressed fully qualified, e.g. "model.params.t".
class ConfigValue {
 public:
  enum class Kind { Bool, Int, Float, Str, Array };
  Kind kind = Kind::Str;
  bool b = false;
  long long i = 0;
  double f = 0.0;
  std::string s;
  std::vector<ConfigValue> arr;

  double as_double() const;
  long long as_int() const;
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;
  const ConfigValue& get(const std::string& key) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

 private:
  std::map<std::string, ConfigValue> values_;
};

}  // namespace kubo
