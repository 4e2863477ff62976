// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slidegraph::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key = value configuration. Every key has a built-in default; files
/// and overrides may only set known keys. Lines starting with '#' and blank
/// lines are ignored.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(std::string_view text, std::string_view origin = "<text>");

  /// Throws ConfigError for unknown keys or values of the wrong type.
  void set(const std::string& key, const std::string& value);

  std::string get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  /// Every key in sorted order, one "key = value" per line.
  std::string resolved() const;
  /// FNV-1a 64 over resolved().
  std::uint64_t hash() const;

  static std::vector<std::string> known_keys();

 private:
  std::map<std::string, std::string> values_;
};

std::string hex_hash(std::uint64_t h);

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "SLIDEGRAPH_CONFIG";

}  // namespace slidegraph::app
