#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "optomech/model.hpp"

namespace optomech {

/// Flat `key = value` configuration (TOML-style scalars, `#` comments).
/// Later assignments override earlier ones; values are kept as text and
/// converted on access.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> string(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<long long> integer(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;

  /// Throws ConfigError naming the first key not in `allowed`.
  template <typename Range>
  void require_known(const Range& allowed) const {
    for (const auto& [key, _] : values_) {
      bool ok = false;
      for (const auto& a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Builds validated ModelParams. g may be given directly or derived from
/// cavity_length, mirror_mass and hbar (coupling_sqrt selects the form).
/// Missing required fields raise ConfigError naming the field; invalid values
/// raise DomainError.
ModelParams model_params_from(const KeyValueConfig& config);

}  // namespace optomech
