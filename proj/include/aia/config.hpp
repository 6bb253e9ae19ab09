#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aia {

/// Flat key=value settings. Every key has a default except `seed`.
class RunConfig {
 public:
  RunConfig();

  /// Reads `key = value` lines; '#' starts a comment. Throws ConfigError on unknown keys.
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);  // throws ConfigError on unknown keys
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;

  std::string str(const std::string& key) const { return get(key); }
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;  // empty string -> empty path
  std::uint64_t seed() const;                                 // throws ConfigError when unset

  /// Keys in definition order with their defaults and a description.
  struct KeySpec {
    std::string key;
    std::string default_value;
    std::string help;
  };
  static const std::vector<KeySpec>& keys();

  /// Canonical `key=value` dump, sorted by key. Without paths it only holds
  /// settings that change results, so runs in different directories compare equal.
  std::string dump(bool include_paths = true) const;

  static bool is_path_key(const std::string& key);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace aia
