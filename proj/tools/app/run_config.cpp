// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slidegraph::app {
namespace {

enum class Kind { Size, U64, Double, Bool, Sizes, Choice };

struct KeySpec {
  const char* name;
  const char* fallback;
  Kind kind;
  const char* choices = "";  // '|' separated, Choice only
};

// Desk-scale defaults. Everything a stage reads lives here.
const KeySpec kKeys[] = {
    {"seed", "7", Kind::U64},
    {"data.slides", "150", Kind::Size},
    {"data.classes", "3", Kind::Size},
    {"data.width", "256", Kind::Size},
    {"data.height", "256", Kind::Size},
    {"data.test_fraction", "0.2", Kind::Double},
    {"segment.luminance_threshold", "0.85", Kind::Double},
    {"segment.min_region_px", "64", Kind::Size},
    {"patch.size", "32", Kind::Size},
    {"patch.min_tissue_fraction", "0.5", Kind::Double},
    {"ssl.hidden", "512,256", Kind::Sizes},
    {"ssl.tap_small_dim", "64", Kind::Size},
    {"ssl.tap_large_dim", "256", Kind::Size},
    {"ssl.projection_dim", "64", Kind::Size},
    {"ssl.epochs", "20", Kind::Size},
    {"ssl.batch", "32", Kind::Size},
    {"ssl.lr", "1e-3", Kind::Double},
    {"ssl.weight_decay", "1e-6", Kind::Double},
    {"ssl.tau", "0.2", Kind::Double},
    {"ssl.momentum", "0.99", Kind::Double},
    {"ssl.queue", "4096", Kind::Size},
    {"ssl.max_patches", "512", Kind::Size},
    {"aug.p_hflip", "0.5", Kind::Double},
    {"aug.p_vflip", "0.5", Kind::Double},
    {"aug.contrast_lo", "0.7", Kind::Double},
    {"aug.contrast_hi", "1.3", Kind::Double},
    {"aug.p_blur", "0.5", Kind::Double},
    {"aug.sigma_lo", "0.1", Kind::Double},
    {"aug.sigma_hi", "1.5", Kind::Double},
    {"graph.k", "8", Kind::Size},
    {"gcn.layers", "128,128", Kind::Sizes},
    {"gcn.layer_kind", "gcn", Kind::Choice, "gcn|basic"},
    {"gcn.head", "64", Kind::Sizes},
    {"gcn.self_loops", "true", Kind::Bool},
    {"gcn.epochs", "30", Kind::Size},
    {"gcn.lr", "1e-4", Kind::Double},
    {"gcn.weight_decay", "1e-6", Kind::Double},
    {"gcn.lr_floor", "0", Kind::Double},
    {"mil.bag_size", "36", Kind::Size},
    {"mil.hidden", "32", Kind::Sizes},
    {"mil.epochs", "30", Kind::Size},
    {"mil.lr", "1e-3", Kind::Double},
    {"mil.weight_decay", "1e-6", Kind::Double},
};

const KeySpec* find_key(std::string_view key) {
  for (const KeySpec& k : kKeys)
    if (key == k.name) return &k;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_integer(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string str(s);
  char* end = nullptr;
  out = std::strtod(str.c_str(), &end);
  return end == str.c_str() + str.size() && std::isfinite(out);
}

bool parse_sizes(std::string_view s, std::vector<std::size_t>& out) {
  out.clear();
  if (s.empty() || s == "none") return true;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string item = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
    std::size_t v = 0;
    if (!parse_integer(std::string_view(item), v) || v == 0) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return true;
}

bool valid(const KeySpec& spec, const std::string& value) {
  switch (spec.kind) {
    case Kind::Size: {
      std::size_t v;
      return parse_integer(std::string_view(value), v);
    }
    case Kind::U64: {
      std::uint64_t v;
      return parse_integer(std::string_view(value), v);
    }
    case Kind::Double: {
      double v;
      return parse_double(value, v);
    }
    case Kind::Bool:
      return value == "true" || value == "false";
    case Kind::Sizes: {
      std::vector<std::size_t> v;
      return parse_sizes(value, v);
    }
    case Kind::Choice: {
      std::string_view choices = spec.choices;
      while (!choices.empty()) {
        const auto bar = choices.find('|');
        if (choices.substr(0, bar) == value) return true;
        if (bar == std::string_view::npos) break;
        choices.remove_prefix(bar + 1);
      }
      return false;
    }
  }
  return false;
}

}  // namespace

RunConfig::RunConfig() {
  for (const KeySpec& k : kKeys) values_[k.name] = k.fallback;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path.string());
}

RunConfig RunConfig::from_text(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      cfg.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + key + "'");
  if (!valid(*spec, value)) throw ConfigError("invalid value '" + value + "' for config key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  std::int64_t v = 0;
  if (!parse_integer(std::string_view(get(key)), v)) throw ConfigError("config key '" + key + "' is not an integer");
  return v;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  std::size_t v = 0;
  if (!parse_integer(std::string_view(get(key)), v)) throw ConfigError("config key '" + key + "' is not a count");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  std::uint64_t v = 0;
  if (!parse_integer(std::string_view(get(key)), v)) throw ConfigError("config key '" + key + "' is not an integer");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  double v = 0;
  if (!parse_double(get(key), v)) throw ConfigError("config key '" + key + "' is not a number");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const { return get(key) == "true"; }

std::vector<std::size_t> RunConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> v;
  if (!parse_sizes(get(key), v)) throw ConfigError("config key '" + key + "' is not a list of counts");
  return v;
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> keys;
  for (const KeySpec& k : kKeys) keys.emplace_back(k.name);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string hex_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace slidegraph::app
