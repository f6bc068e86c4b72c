#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ggr/errors.hpp"

namespace ggr {

// Flat `key = value` configuration with `[section]` headers.  Keys are stored
// as "section.key"; lines starting with '#' or ';' are comments.  Lookups
// throw input_error naming the offending key, so a bad or missing entry
// surfaces as a domain problem (CLI exit 2) with an actionable message.
struct Config {
  std::map<std::string, std::string> values;
  std::string raw; // original text, hashed into the output header

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw input_error("config key '" + key + "' is required");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_double(key, it->second);
  }

  int get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw input_error("config key '" + key + "' must be an integer");
    return i;
  }

  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw input_error("config key '" + key + "' must list at least one value");
    return out;
  }

  std::vector<int> get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_double_list(key)) {
      const int i = static_cast<int>(v);
      if (static_cast<double>(i) != v)
        throw input_error("config key '" + key + "' must list integers");
      out.push_back(i);
    }
    return out;
  }

private:
  static double parse_double(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      throw input_error("config key '" + key + "' has a non-numeric value '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size())
      throw input_error("config key '" + key + "' has a non-numeric value '" + text + "'");
    return v;
  }
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

} // namespace detail

inline Config parse_config_text(const std::string& text) {
  Config cfg;
  cfg.raw = text;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = detail::strip(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw input_error("config line " + std::to_string(lineno) + ": unterminated section");
      section = detail::strip(t.substr(1, t.size() - 2));
      if (section.empty())
        throw input_error("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw input_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::strip(t.substr(0, eq));
    const std::string value = detail::strip(t.substr(eq + 1));
    if (key.empty())
      throw input_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.values[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

// FNV-1a over the raw config bytes; printed in the output header so a result
// file can be traced back to the exact configuration that produced it.
inline std::string config_hash(const Config& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : cfg.raw) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace ggr
