#include "optomech/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace optomech {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string no_comment = strip_comment(raw);
    const std::string_view line = trim(no_comment);
    if (line.empty()) continue;
    const auto where = std::string(origin) + ":" + std::to_string(line_no);
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    for (char ch : key) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
        throw ConfigError(where + ": invalid key '" + std::string(key) + "'");
      }
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::string name(key);
    std::replace(name.begin(), name.end(), '-', '_');
    cfg.values_[name] = std::string(value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::number(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  double v = 0.0;
  const char* end = s->data() + s->size();
  auto [ptr, ec] = std::from_chars(s->data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "' is not a number: '" + *s + "'");
  }
  return v;
}

std::optional<long long> KeyValueConfig::integer(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  long long v = 0;
  const char* end = s->data() + s->size();
  auto [ptr, ec] = std::from_chars(s->data(), end, v);
  if (ec != std::errc() || ptr != end) {
    // allow 1e5-style integers
    const auto d = number(key);
    if (*d != static_cast<double>(static_cast<long long>(*d))) {
      throw ConfigError("config key '" + key + "' is not an integer: '" + *s + "'");
    }
    return static_cast<long long>(*d);
  }
  return v;
}

std::optional<bool> KeyValueConfig::boolean(const std::string& key) const {
  const auto s = string(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1") return true;
  if (*s == "false" || *s == "0") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + *s + "'");
}

ModelParams model_params_from(const KeyValueConfig& c) {
  auto required = [&](const char* key) {
    const auto v = c.number(key);
    if (!v) throw ConfigError(std::string("missing required parameter '") + key + "'");
    return *v;
  };
  const double omega_c = required("omega_c");
  const double omega_m = required("omega_m");
  const double gamma1 = required("gamma1");
  const double gamma2 = required("gamma2");
  double g = 0.0;
  if (const auto direct = c.number("g")) {
    g = *direct;
  } else if (c.contains("cavity_length") || c.contains("mirror_mass")) {
    GeometryParams geo;
    geo.cavity_length = required("cavity_length");
    geo.mirror_mass = required("mirror_mass");
    geo.omega_c = omega_c;
    geo.omega_m = omega_m;
    geo.hbar = c.number("hbar").value_or(1.0);
    const bool use_sqrt = c.boolean("coupling_sqrt").value_or(false);
    g = coupling_from_geometry(geo, use_sqrt ? CouplingForm::kSquareRoot
                                             : CouplingForm::kAsPrinted);
  } else {
    throw ConfigError("missing required parameter 'g' (or cavity_length + mirror_mass)");
  }
  const Complex drive(c.number("drive_re").value_or(0.0), c.number("drive_im").value_or(0.0));
  return ModelParams::make(omega_c, omega_m, g, gamma1, gamma2, drive);
}

}  // namespace optomech
