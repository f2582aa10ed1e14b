#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "idflow/idnet.hpp"

namespace idflow {

/// Line-oriented key=value run configuration ('#' starts a comment).
/// Unknown keys are rejected. Values are fetched with a fallback so command
/// line flags can override file entries.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::string get_str(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// NetworkConfig as key=value text, written next to checkpoints so inference
// can rebuild the exact architecture.
void write_net_config(const NetworkConfig& cfg, const std::filesystem::path& path);
NetworkConfig read_net_config(const std::filesystem::path& path);

}  // namespace idflow
