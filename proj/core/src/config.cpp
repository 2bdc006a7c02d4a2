#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hte/config.hpp"

namespace hte {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (cfg.data_.find(section) == cfg.data_.end()) {
        cfg.data_[section] = {};
        cfg.section_order_.push_back(section);
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    cfg.set(section, key, value);
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  if (it == data_.end()) return false;
  for (const auto& [k, v] : it->second)
    if (k == key) return true;
  return false;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  if (it != data_.end())
    for (const auto& [k, v] : it->second)
      if (k == key) return v;
  throw std::runtime_error("config: missing [" + section + "] " + key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: [" + section + "] " + key + " is not a number: " + v);
  }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    return std::stoll(v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: [" + section + "] " + key + " is not an integer: " + v);
  }
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get_string(section, key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw std::runtime_error("config: [" + section + "] " + key + " is not a boolean: " + v);
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
  const std::string v = get_string(section, key);
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      const std::string item = trim(cur);
      if (!item.empty()) out.push_back(item);
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string item = trim(cur);
  if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(section, key)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::runtime_error("config: [" + section + "] " + key + " has non-numeric item: " +
                               item);
    }
  }
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  auto it = data_.find(section);
  if (it == data_.end()) {
    data_[section] = {};
    section_order_.push_back(section);
    it = data_.find(section);
  }
  for (auto& [k, v] : it->second) {
    if (k == key) {
      v = value;
      return;
    }
  }
  it->second.emplace_back(key, value);
}

std::string ConfigFile::serialize() const {
  std::ostringstream out;
  for (const auto& section : section_order_) {
    out << "[" << section << "]\n";
    for (const auto& [k, v] : data_.at(section)) out << k << " = " << v << "\n";
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> ConfigFile::sections() const { return section_order_; }

}  // namespace hte
