#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gadiff {

/// Flat key = value run configuration. Every key has a documented default;
/// unknown keys are rejected. Precedence: CLI flag > config file >
/// dataset preset > global default.
class RunConfig {
 public:
  RunConfig();

  static const std::map<std::string, std::string>& defaults();
  static const std::vector<std::string>& preset_names();

  void load_file(const std::string& path);
  void apply_preset(const std::string& name);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_f(const std::string& key) const;
  long get_i(const std::string& key) const;
  bool get_b(const std::string& key) const;

  /// Canonical sorted key=value text (one per line).
  std::string canonical() const;
  std::uint64_t hash() const;  // FNV-1a of canonical()

  void write(const std::string& path) const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace gadiff
