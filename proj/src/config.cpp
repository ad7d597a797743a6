#include "kubo/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kubo/errors.hpp"

namespace kubo {

double ConfigValue::as_double() const {
  switch (kind) {
    case Kind::Float: return f;
    case Kind::Int: return static_cast<double>(i);
    default: fail("ConfigType", ErrKind::Precondition, "value is not numeric");
  }
}

long long ConfigValue::as_int() const {
  if (kind != Kind::Int) fail("ConfigType", ErrKind::Precondition, "value is not an integer");
  return i;
}

namespace {

void skip_ws(const std::string& s, size_t& p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
}

ConfigValue parse_value(const std::string& s, size_t& p);

ConfigValue parse_array(const std::string& s, size_t& p) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::Array;
  ++p;  // '['
  for (;;) {
    skip_ws(s, p);
    if (p >= s.size()) fail("ConfigParse", ErrKind::Precondition, "unterminated array");
    if (s[p] == ']') { ++p; break; }
    v.arr.push_back(parse_value(s, p));
    skip_ws(s, p);
    if (p < s.size() && s[p] == ',') ++p;
  }
  return v;
}

ConfigValue parse_value(const std::string& s, size_t& p) {
  skip_ws(s, p);
  ConfigValue v;
  if (p >= s.size()) fail("ConfigParse", ErrKind::Precondition, "missing value");
  if (s[p] == '[') return parse_array(s, p);
  if (s[p] == '"') {
    size_t q = s.find('"', p + 1);
    if (q == std::string::npos) fail("ConfigParse", ErrKind::Precondition, "unterminated string");
    v.kind = ConfigValue::Kind::Str;
    v.s = s.substr(p + 1, q - p - 1);
    p = q + 1;
    return v;
  }
  size_t start = p;
  while (p < s.size() && s[p] != ',' && s[p] != ']' && s[p] != ' ' && s[p] != '\t') ++p;
  std::string tok = s.substr(start, p - start);
  if (tok == "true" || tok == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.b = (tok == "true");
    return v;
  }
  if (tok == "inf" || tok == "-inf") {
    v.kind = ConfigValue::Kind::Float;
    v.f = (tok[0] == '-') ? -HUGE_VAL : HUGE_VAL;
    return v;
  }
  try {
    size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos) {
      v.kind = ConfigValue::Kind::Int;
      v.i = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    }
    v.kind = ConfigValue::Kind::Float;
    v.f = std::stod(tok, &used);
    if (used != tok.size()) fail("ConfigParse", ErrKind::Precondition, "bad token: " + tok);
    return v;
  } catch (const std::invalid_argument&) {
    fail("ConfigParse", ErrKind::Precondition, "bad token: " + tok);
  }
}

std::string strip_comment(const std::string& line) {
  bool instr = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') instr = !instr;
    if (line[i] == '#' && !instr) return line.substr(0, i);
  }
  return line;
}

int bracket_depth(const std::string& s) {
  int depth = 0;
  bool instr = false;
  for (char c : s) {
    if (c == '"') instr = !instr;
    if (instr) continue;
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  std::string pending_key, pending_rhs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (!pending_key.empty()) {
      pending_rhs += " " + line;
      if (bracket_depth(pending_rhs) > 0) continue;
      size_t p = 0;
      cfg.values_[pending_key] = parse_value(pending_rhs, p);
      pending_key.clear();
      pending_rhs.clear();
      continue;
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && bracket_depth(line) == 0 &&
        line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail("ConfigParse", ErrKind::Precondition, "expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string rhs = trim(line.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;
    if (bracket_depth(rhs) > 0) {
      pending_key = full;
      pending_rhs = rhs;
      continue;
    }
    size_t p = 0;
    cfg.values_[full] = parse_value(rhs, p);
  }
  if (!pending_key.empty()) fail("ConfigParse", ErrKind::Precondition, "unterminated array: " + pending_key);
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail("ConfigIO", ErrKind::Precondition, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const ConfigValue& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail("ConfigKey", ErrKind::Precondition, "missing key: " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const { return get(key).as_double(); }
double Config::get_double(const std::string& key, double fb) const { return has(key) ? get_double(key) : fb; }
long long Config::get_int(const std::string& key) const { return get(key).as_int(); }
long long Config::get_int(const std::string& key, long long fb) const { return has(key) ? get_int(key) : fb; }

std::string Config::get_string(const std::string& key) const {
  const auto& v = get(key);
  if (v.kind != ConfigValue::Kind::Str) fail("ConfigType", ErrKind::Precondition, key + " is not a string");
  return v.s;
}
std::string Config::get_string(const std::string& key, const std::string& fb) const {
  return has(key) ? get_string(key) : fb;
}
bool Config::get_bool(const std::string& key, bool fb) const {
  if (!has(key)) return fb;
  const auto& v = get(key);
  if (v.kind != ConfigValue::Kind::Bool) fail("ConfigType", ErrKind::Precondition, key + " is not a bool");
  return v.b;
}

std::vector<double> Config::get_double_array(const std::string& key) const {
  const auto& v = get(key);
  if (v.kind != ConfigValue::Kind::Array) fail("ConfigType", ErrKind::Precondition, key + " is not an array");
  std::vector<double> out;
  out.reserve(v.arr.size());
  for (const auto& e : v.arr) out.push_back(e.as_double());
  return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

}  // namespace kubo
