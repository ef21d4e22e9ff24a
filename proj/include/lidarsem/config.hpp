#ifndef LIDARSEM_CONFIG_HPP
#define LIDARSEM_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lidarsem/core.hpp"

namespace lidarsem {

// Minimal declarative config format:
//   [section]        sections may repeat (object lists)
//   key = value      '#' starts a comment
struct IniSection {
  std::string name;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // whitespace-separated list of reals
  std::vector<double> get_doubles(const std::string& key) const;
  std::string require(const std::string& key) const;
};

struct IniFile {
  std::vector<IniSection> sections;  // in file order

  const IniSection* find(const std::string& name) const;
  const IniSection& require(const std::string& name) const;
  std::vector<const IniSection*> find_all(const std::string& name) const;
};

IniFile parse_ini(const std::filesystem::path& path);
IniFile parse_ini_text(const std::string& text);

}  // namespace lidarsem

#endif
