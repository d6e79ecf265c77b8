#include "shotlgcp/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

namespace {

Config from_stream(std::istream& in, const std::string& origin) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Config config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(origin + ": key '" + section + "' must appear inside a [section]");
    }
    for (const auto& [key, value] : body) config.set(section + "." + key, value.data());
  }
  return config;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

} // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return from_stream(in, path.string());
}

Config Config::parse(const std::string& text) {
  std::istringstream in(text);
  return from_stream(in, "config");
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
    throw ConfigError("config key '" + key + "' is not of the form section.key");
  }
  values_[key] = value;
}

std::optional<std::string> Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string Config::require_string(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty()) throw ConfigError("config key '" + key + "' is required");
  return *v;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + *v + "'");
  }
  return out;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty() || *v == "auto") return std::nullopt;
  return get_double(key, 0.0);
}

long Config::get_long(const std::string& key, long fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + *v + "'");
  }
  return out;
}

int Config::get_int(const std::string& key, int fallback) const {
  const long v = get_long(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("config key '" + key + "' is out of range");
  return static_cast<int>(v);
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("config key '" + key + "' expects a nonnegative integer, got '" + *v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + *v + "'");
}

void Config::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

} // namespace shotlgcp
