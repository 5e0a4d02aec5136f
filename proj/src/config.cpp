// SPDX-License-Identifier: Apache-2.0

#include "creepfit/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "creepfit/common.hpp"

namespace creepfit {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

IniFile IniFile::parse(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw io_error("config line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (!ini.sections_.count(section)) {
        ini.sections_[section] = {};
        ini.order_.push_back(section);
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw io_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw io_error("config line " + std::to_string(line_no) + ": empty key");
    auto& entries = ini.sections_[section];
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const Entry& e) { return e.key == key; });
    if (it != entries.end())
      it->value = value;
    else
      entries.push_back({key, value});
  }
  return ini;
}

bool IniFile::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) return std::nullopt;
  for (const auto& e : sec->second)
    if (e.key == key) return e.value;
  return std::nullopt;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
  std::vector<std::string> result;
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) return result;
  for (const auto& e : sec->second) result.push_back(e.key);
  return result;
}

double IniFile::get_double(const std::string& section, const std::string& key) const {
  const auto value = get(section, key);
  if (!value) throw io_error("config: missing [" + section + "] " + key);
  char* end = nullptr;
  const double parsed = std::strtod(value->c_str(), &end);
  if (end == value->c_str() || *end != '\0')
    throw io_error("config: [" + section + "] " + key + " is not a number: '" + *value + "'");
  return parsed;
}

std::uint64_t IniFile::get_uint(const std::string& section, const std::string& key) const {
  const auto value = get(section, key);
  if (!value) throw io_error("config: missing [" + section + "] " + key);
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value->c_str(), &end, 10);
  if (end == value->c_str() || *end != '\0')
    throw io_error("config: [" + section + "] " + key + " is not an integer: '" + *value + "'");
  return parsed;
}

int IniFile::get_int(const std::string& section, const std::string& key) const {
  return static_cast<int>(get_double(section, key));
}

bool IniFile::get_bool(const std::string& section, const std::string& key) const {
  const auto value = get(section, key);
  if (!value) throw io_error("config: missing [" + section + "] " + key);
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  throw io_error("config: [" + section + "] " + key + " is not a boolean: '" + *value + "'");
}

std::vector<double> IniFile::get_doubles(const std::string& section, const std::string& key) const {
  const auto value = get(section, key);
  if (!value) throw io_error("config: missing [" + section + "] " + key);
  std::istringstream in(*value);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double parsed = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw io_error("config: [" + section + "] " + key + " has a non-numeric entry '" + token +
                     "'");
    values.push_back(parsed);
  }
  if (values.empty()) throw io_error("config: [" + section + "] " + key + " is empty");
  return values;
}

double IniFile::get_or(const std::string& section, const std::string& key, double fallback) const {
  return get(section, key) ? get_double(section, key) : fallback;
}

int IniFile::get_or(const std::string& section, const std::string& key, int fallback) const {
  return get(section, key) ? get_int(section, key) : fallback;
}

bool IniFile::get_or(const std::string& section, const std::string& key, bool fallback) const {
  return get(section, key) ? get_bool(section, key) : fallback;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const auto value = get(section, key);
  return value ? *value : fallback;
}

}  // namespace creepfit
