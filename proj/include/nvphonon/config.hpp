#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nvp {

/// Flat `section.key = value` configuration. Every key must be known (see
/// known_config_keys); values are text until a typed getter converts them.
/// Getters throw Error(ConfigError) naming the key and where it was set.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config load(const std::filesystem::path& path);

  /// Later values replace earlier ones (command-line flags override files).
  void set(const std::string& key, const std::string& value, const std::string& origin = "command line");
  void merge(const Config& other);
  bool has(const std::string& key) const;

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// "a,b,c" or an inclusive range "start:stop:step".
  std::vector<double> list(const std::string& key) const;
  std::array<double, 3> vector3(const std::string& key, const std::array<double, 3>& fallback) const;
  /// Material overrides collected from `material.*` keys, parsed as numbers.
  std::map<std::string, double> material_overrides() const;

  /// Sorted `key = value` lines; the hash is FNV-1a (64 bit) of this text.
  std::string canonical() const;
  std::uint64_t hash() const;

 private:
  struct Entry {
    std::string value;
    std::string origin;
  };
  const Entry& entry(const std::string& key) const;
  std::map<std::string, Entry> entries_;
};

/// Every accepted key outside the `material.` section.
const std::vector<std::string>& known_config_keys();

/// Parses "a,b,c" or "start:stop:step" (inclusive stop within 1e-9 step).
std::vector<double> parse_list(const std::string& text);

std::uint64_t fnv1a(const std::string& text);

/// Comma-separated table with a provenance comment line, a header row and
/// numbers printed with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::string& provenance, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  /// Row whose leading cells are text.
  void row(const std::vector<std::string>& labels, const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

std::string format_number(double value);

}  // namespace nvp
