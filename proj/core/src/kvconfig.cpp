#include "mforge/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mforge/errors.hpp"

namespace mforge {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

KVConfig KVConfig::parse(const std::string& text) {
  KVConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError("malformed key = value line: \"" + t + "\"");
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

KVConfig KVConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KVConfig::serialize() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    out << order_[i] << " = " << values_[i] << "\n";
  }
  return out.str();
}

void KVConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write config: " + path);
  out << serialize();
}

int KVConfig::find(const std::string& key) const {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (order_[i] == key) return static_cast<int>(i);
  }
  return -1;
}

bool KVConfig::has(const std::string& key) const { return find(key) >= 0; }

std::string KVConfig::get(const std::string& key) const {
  const int i = find(key);
  if (i < 0) throw DataError("missing config key: " + key);
  return values_[static_cast<std::size_t>(i)];
}

std::string KVConfig::get_or(const std::string& key, const std::string& fallback) const {
  const int i = find(key);
  return i < 0 ? fallback : values_[static_cast<std::size_t>(i)];
}

long long KVConfig::get_int(const std::string& key) const {
  const std::string s = get(key);
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw DataError("config key " + key + " is not an integer: \"" + s + "\"");
  }
}

long long KVConfig::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KVConfig::get_double(const std::string& key) const {
  const std::string s = get(key);
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("config key " + key + " is not a number: \"" + s + "\"");
  }
}

double KVConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KVConfig::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw DataError("config key " + key + " is not a boolean: \"" + s + "\"");
}

void KVConfig::set(const std::string& key, const std::string& value) {
  const int i = find(key);
  if (i >= 0) {
    values_[static_cast<std::size_t>(i)] = value;
  } else {
    order_.push_back(key);
    values_.push_back(value);
  }
}

void KVConfig::set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

void KVConfig::set_double(const std::string& key, double value) { set(key, format_double(value)); }

void KVConfig::set_bool(const std::string& key, bool value) { set(key, value ? "true" : "false"); }

}  // namespace mforge
