#include "otrf_cli/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "otrf/error.hpp"

namespace otrf::cli {
namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string>& parts) {
  return boost::algorithm::join(parts, ",");
}

std::string format_double(double v) {
  // Shortest representation that round-trips.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = boost::algorithm::trim_copy(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidRequest(what + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = boost::algorithm::trim_copy(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidRequest(what + ": expected an integer, got '" + text + "'");
  return v;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRequest("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  try {
    pt::read_ini(in, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidRequest("config: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

bool Config::has(const std::string& key) const { return raw(key).has_value(); }

std::optional<std::string> Config::raw(const std::string& key) const {
  if (auto v = tree_.get_optional<std::string>(key)) return boost::algorithm::trim_copy(*v);
  return std::nullopt;
}

void Config::record(const std::string& key, const std::string& value) {
  used_.insert(key);
  echo_.put(key, value);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const std::string v = raw(key).value_or(fallback);
  record(key, v);
  return v;
}

double Config::get_double(const std::string& key, double fallback) {
  const auto r = raw(key);
  const double v = r ? parse_double(*r, key) : fallback;
  record(key, format_double(v));
  return v;
}

int Config::get_int(const std::string& key, int fallback) {
  const auto r = raw(key);
  const long long v = r ? parse_int(*r, key) : fallback;
  if (v < INT32_MIN || v > INT32_MAX) throw InvalidRequest(key + ": out of range");
  record(key, std::to_string(v));
  return static_cast<int>(v);
}

std::uint64_t Config::get_seed(const std::string& key) {
  const auto r = raw(key);
  if (!r || r->empty()) throw InvalidRequest(key + " is required (set it in the config or pass --seed)");
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(r->data(), r->data() + r->size(), v);
  if (ec != std::errc() || ptr != r->data() + r->size())
    throw InvalidRequest(key + ": expected a nonnegative integer, got '" + *r + "'");
  record(key, std::to_string(v));
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const auto r = raw(key);
  bool v = fallback;
  if (r) {
    const std::string t = boost::algorithm::to_lower_copy(*r);
    if (t == "true" || t == "1" || t == "yes" || t == "on")
      v = true;
    else if (t == "false" || t == "0" || t == "no" || t == "off")
      v = false;
    else
      throw InvalidRequest(key + ": expected true or false, got '" + *r + "'");
  }
  record(key, v ? "true" : "false");
  return v;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) {
  const auto r = raw(key);
  std::vector<std::string> out;
  if (r) {
    boost::algorithm::split(out, *r, boost::algorithm::is_any_of(","));
    for (auto& s : out) boost::algorithm::trim(s);
    if (std::any_of(out.begin(), out.end(), [](const std::string& s) { return s.empty(); }))
      throw InvalidRequest(key + ": empty entry in list '" + *r + "'");
  } else {
    out = fallback;
  }
  if (out.empty()) throw InvalidRequest(key + ": grid must not be empty");
  record(key, join(out));
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) {
  std::vector<std::string> fb;
  for (double v : fallback) fb.push_back(format_double(v));
  std::vector<double> out;
  for (const auto& s : get_strings(key, fb)) out.push_back(parse_double(s, key));
  return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) {
  std::vector<std::string> fb;
  for (int v : fallback) fb.push_back(std::to_string(v));
  std::vector<int> out;
  for (const auto& s : get_strings(key, fb)) {
    const long long v = parse_int(s, key);
    if (v < INT32_MIN || v > INT32_MAX) throw InvalidRequest(key + ": out of range");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void Config::check_all_used() const {
  std::vector<std::string> unknown;
  for (const auto& [section, body] : tree_) {
    if (body.empty()) {
      if (!used_.count(section)) unknown.push_back(section);
      continue;
    }
    for (const auto& [key, value] : body)
      if (!used_.count(section + "." + key)) unknown.push_back(section + "." + key);
  }
  if (!unknown.empty()) throw InvalidRequest("config: unknown keys: " + join(unknown));
}

void Config::write_echo(std::ostream& out) const { pt::write_ini(out, echo_); }

}  // namespace otrf::cli
