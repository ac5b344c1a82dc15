// Plain key-value experiment configuration: one `key = value` per line,
// '#' comments, later keys override earlier ones.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tvu {

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  double get_num(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated numeric list, e.g. "rhos = 0.02,0.05,0.1".
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  std::string serialize() const;  // sorted keys, parseable by parse()
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Seed resolution: explicit config `seed`, else the TVU_SEED environment
// variable, else the given fallback.
std::uint64_t resolve_seed(const Config& cfg, std::uint64_t fallback);

}  // namespace tvu
