#pragma once

#include <map>
#include <string>
#include <vector>

namespace qprl {

/// Flat `key = value` configuration text. Lines starting with '#' are
/// comments; later keys override earlier ones.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  /// Applies `key=value` override strings (CLI form).
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Resolved key/value text, sorted by key, suitable for config.txt.
  std::string render() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace qprl
