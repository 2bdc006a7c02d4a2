#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hte {

// Minimal key/value config format: `[section]` headers (dots allowed for
// nesting), `key = value` lines, `#` comments, comma-separated lists.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  std::string serialize() const;

  std::vector<std::string> sections() const;

 private:
  // section -> ordered key/value pairs
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> data_;
  std::vector<std::string> section_order_;
};

}  // namespace hte
