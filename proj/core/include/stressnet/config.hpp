#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "stressnet/error.hpp"

namespace stressnet {

/// Plain-text configuration: `key = value` lines, `#` comments, dotted
/// keys. Keys are checked against the registered schema; unknown keys are
/// errors.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  /// Later values win; used for --config over STRESSNET_CONFIG.
  void merge(const Config& overrides);

  bool has(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace stressnet
