#include "lidarsem/config.hpp"

#include <fstream>
#include <sstream>

namespace lidarsem {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string IniSection::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::string IniSection::require(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) {
    throw ConfigError("[" + name + "] missing required key '" + key + "'");
  }
  return it->second;
}

double IniSection::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("[" + name + "] " + key + ": not a number: " + it->second);
  }
}

int IniSection::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ConfigError("[" + name + "] " + key + ": not an integer: " + it->second);
  }
}

bool IniSection::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("[" + name + "] " + key + ": not a boolean: " + v);
}

std::vector<double> IniSection::get_doubles(const std::string& key) const {
  std::vector<double> out;
  auto it = values.find(key);
  if (it == values.end()) return out;
  std::istringstream ss(it->second);
  double v;
  while (ss >> v) out.push_back(v);
  return out;
}

const IniSection* IniFile::find(const std::string& name) const {
  for (const IniSection& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const IniSection& IniFile::require(const std::string& name) const {
  const IniSection* s = find(name);
  if (!s) throw ConfigError("missing required section [" + name + "]");
  return *s;
}

std::vector<const IniSection*> IniFile::find_all(const std::string& name) const {
  std::vector<const IniSection*> out;
  for (const IniSection& s : sections) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

IniFile parse_ini_text(const std::string& text) {
  IniFile file;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  IniSection* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      }
      file.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      current = &file.sections.back();
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || !current) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    current->values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return file;
}

IniFile parse_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini_text(ss.str());
}

}  // namespace lidarsem
