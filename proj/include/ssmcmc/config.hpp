#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmcmc {

/// Invalid or missing configuration values; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` configuration. Lines starting with '#' are
/// comments. Keys are kept sorted so the text form is canonical.
class Config {
public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] std::string require_string(const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] long long get_int(const std::string& key, long long fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  [[nodiscard]] std::vector<double> get_list(const std::string& key,
                                             const std::vector<double>& fallback) const;

  [[nodiscard]] std::string to_text() const;
  /// Nested JSON object, one level per dotted key segment. Values stay strings.
  [[nodiscard]] std::string to_json() const;
  /// FNV-1a over to_text(), as 16 hex digits.
  [[nodiscard]] std::string hash() const;

  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace ssmcmc
