#pragma once

#include <string>
#include <vector>

namespace mforge {

// Ordered `key = value` text block. Used for corpus manifest headers, run
// configuration files, and the config echo stored in checkpoints.
class KVConfig {
 public:
  static KVConfig parse(const std::string& text);
  static KVConfig load(const std::string& path);

  std::string serialize() const;  // insertion order, one "key = value" per line
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  const std::vector<std::string>& keys() const { return order_; }

  std::string get(const std::string& key) const;  // DataError when absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, long long value);
  void set_double(const std::string& key, double value);  // shortest round-trip form
  void set_bool(const std::string& key, bool value);

 private:
  std::vector<std::string> order_;
  std::vector<std::string> values_;
  int find(const std::string& key) const;
};

// Shortest decimal form that parses back to the same double (to_chars).
std::string format_double(double v);

std::string trim(const std::string& s);

}  // namespace mforge
