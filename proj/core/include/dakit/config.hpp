#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dakit {

/// Flat `key = value` configuration with `#` comments. Dotted keys group
/// options by module (window.t0, ens.size, loc.cutoff, ...). The same format
/// is used for run manifests so a finished run can be replayed from its
/// manifest file alone.
class Config {
public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// comma separated list of doubles
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// canonical serialized form (sorted keys), suitable for manifests
  std::string serialize() const;
  void write_file(const std::string& path) const;

private:
  std::map<std::string, std::string> kv_;
};

} // namespace dakit
