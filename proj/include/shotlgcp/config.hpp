#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace shotlgcp {

/// Flat `section.key = value` settings read from an INI file:
///
///   # comment
///   [sampler]
///   iterations = 15000
///
/// Keys outside any section are not allowed. Later `set` calls override
/// file values.
class Config {
public:
  Config() = default;

  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  /// "section.key=value"
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::string require_string(const std::string& key) const;

  /// Raises ConfigError naming the first key not in `allowed`.
  void check_keys(const std::set<std::string>& allowed) const;

  /// One `section.key=value` line per entry, sorted by key.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

std::string fnv1a_hex(const std::string& text);

} // namespace shotlgcp
