#include "dakit/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dakit {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
} // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("Config: missing '=' at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("Config: empty key at line " + std::to_string(lineno));
    cfg.kv_[key] = val;
  }
  return cfg;
}

std::string Config::get_str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::runtime_error("Config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("Config: key '" + key + "' is not a number: " + v);
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  return static_cast<int>(get_double(key));
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return std::stoull(get_str(key));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::runtime_error("Config: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(get_str(key));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

void Config::set_double(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  kv_[key] = buf;
}

void Config::set_int(const std::string& key, long long value) {
  kv_[key] = std::to_string(value);
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
  return out.str();
}

void Config::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Config: cannot write " + path);
  out << serialize();
}

} // namespace dakit
