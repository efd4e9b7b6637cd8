#pragma once

#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace otrf::cli {

/// INI-style run configuration ("key = value" lines under [section] headers).
/// Keys are addressed as "section.key". Every key read, with the value that
/// was actually used (default or given), is recorded for config.echo.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_seed(const std::string& key);  // required
  bool get_bool(const std::string& key, bool fallback);

  /// Comma-separated lists. An explicitly empty value is an error.
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback);

  /// Throws InvalidRequest naming keys present in the file but never read.
  void check_all_used() const;

  void write_echo(std::ostream& out) const;

 private:
  std::optional<std::string> raw(const std::string& key) const;
  void record(const std::string& key, const std::string& value);

  boost::property_tree::ptree tree_;
  boost::property_tree::ptree echo_;
  std::set<std::string> used_;
};

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);

}  // namespace otrf::cli
