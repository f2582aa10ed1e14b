#include "idflow/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "idflow/error.hpp"

namespace idflow {
namespace {

const std::set<std::string>& known_run_keys() {
  static const std::set<std::string> keys = {
      "scheme",   "iterations", "seq_len", "gamma",  "bins",   "channels",
      "deblur",   "wsm",        "propagation", "lr_max", "batch",  "steps",
      "p_hflip",  "p_vflip",    "crop_h",  "crop_w", "seed",   "data",
      "out",      "ckpt",
  };
  return keys;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& where) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(where + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(where + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  cfg.kv_ = parse_kv(text, "config");
  for (const auto& [key, value] : cfg.kv_)
    if (!known_run_keys().count(key)) throw UsageError("unknown config key: " + key);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_string(read_text_file(path));
}

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

int64_t RunConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " expects an integer, got '" + it->second + "'");
  }
}

double RunConfig::get_real(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " expects a number, got '" + it->second + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "1" || it->second == "true" || it->second == "on") return true;
  if (it->second == "0" || it->second == "false" || it->second == "off") return false;
  throw UsageError("config key " + key + " expects a boolean, got '" + it->second + "'");
}

void write_net_config(const NetworkConfig& cfg, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  std::fprintf(f, "bins=%d\nchannels=%d\ndownsample=%d\nfuture_head=%d\nwsm=%d\n", cfg.bins,
               cfg.channels, cfg.downsample, cfg.future_head ? 1 : 0, cfg.wsm ? 1 : 0);
  std::fclose(f);
}

NetworkConfig read_net_config(const std::filesystem::path& path) {
  const auto kv = parse_kv(read_text_file(path), path.string());
  NetworkConfig cfg;
  auto fetch = [&](const char* key, int fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return static_cast<int>(std::stoll(it->second));
  };
  cfg.bins = fetch("bins", cfg.bins);
  cfg.channels = fetch("channels", cfg.channels);
  cfg.downsample = fetch("downsample", cfg.downsample);
  cfg.future_head = fetch("future_head", cfg.future_head ? 1 : 0) != 0;
  cfg.wsm = fetch("wsm", cfg.wsm ? 1 : 0) != 0;
  cfg.validate();
  return cfg;
}

}  // namespace idflow
