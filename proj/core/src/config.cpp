#include "stressnet/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace stressnet {

namespace {

enum class KeyType { Bool, Int, Real, Text };

struct KeySpec {
  const char* name;
  KeyType type;
};

// every key the pipeline understands; parse rejects anything else
constexpr std::array<KeySpec, 36> kSchema = {{
    {"crop", KeyType::Text},
    {"emission.derivative", KeyType::Bool},
    {"emission.signlog", KeyType::Bool},
    {"emission.gaussian", KeyType::Bool},
    {"emission.sigma_spatial", KeyType::Real},
    {"emission.sigma_temporal", KeyType::Real},
    {"gt.threshold_k", KeyType::Real},
    {"gt.min_distance_s", KeyType::Real},
    {"gt.max_lag_s", KeyType::Real},
    {"isti.max_ms", KeyType::Real},
    {"hr.window_s", KeyType::Real},
    {"hr.stride_s", KeyType::Real},
    {"train.lr_backbone", KeyType::Real},
    {"train.lr_head", KeyType::Real},
    {"train.lr_decay_factor", KeyType::Real},
    {"train.decay_period_epochs", KeyType::Int},
    {"train.epochs", KeyType::Int},
    {"train.batch_frames", KeyType::Int},
    {"train.n_bins", KeyType::Int},
    {"train.alpha", KeyType::Real},
    {"train.seq_seconds", KeyType::Real},
    {"train.seed", KeyType::Int},
    {"train.lstm_layers", KeyType::Int},
    {"train.lstm_hidden", KeyType::Int},
    {"train.head_hidden", KeyType::Int},
    {"train.conv_channels", KeyType::Text},
    {"train.bce_bins", KeyType::Bool},
    {"train.input_scale", KeyType::Real},
    {"stress.lr", KeyType::Real},
    {"stress.epochs", KeyType::Int},
    {"stress.seed", KeyType::Int},
    {"stress.n_in", KeyType::Int},
    {"stress.hidden0", KeyType::Int},
    {"stress.hidden1", KeyType::Int},
    {"stress.input_min", KeyType::Real},
    {"stress.input_max", KeyType::Real},
}};

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : kSchema) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  fail(ErrorKind::ConfigError, where + ": bad boolean '" + v + "'");
}

void check_value(const KeySpec& spec, const std::string& value, const std::string& where) {
  switch (spec.type) {
    case KeyType::Bool:
      parse_bool(value, where);
      break;
    case KeyType::Int: {
      try {
        std::size_t used = 0;
        (void)std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        fail(ErrorKind::ConfigError, where + ": bad integer '" + value + "'");
      }
      break;
    }
    case KeyType::Real: {
      try {
        std::size_t used = 0;
        (void)std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        fail(ErrorKind::ConfigError, where + ": bad number '" + value + "'");
      }
      break;
    }
    case KeyType::Text:
      break;
  }
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ConfigError, where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_key(key);
    if (!spec) fail(ErrorKind::ConfigError, where + ": unknown key '" + key + "'");
    check_value(*spec, value, where);
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path.string());
}

void Config::merge(const Config& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_bool(it->second, key);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoll(it->second);
}

double Config::get_real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

}  // namespace stressnet
