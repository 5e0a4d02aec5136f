// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace creepfit {

/// Minimal INI reader: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Later duplicates overwrite earlier ones.
class IniFile {
public:
  static IniFile parse(const std::string& text);

  bool has_section(const std::string& section) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  /// Keys of one section in file order.
  std::vector<std::string> keys(const std::string& section) const;

  double get_double(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  double get_or(const std::string& section, const std::string& key, double fallback) const;
  int get_or(const std::string& section, const std::string& key, int fallback) const;
  bool get_or(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

private:
  struct Entry {
    std::string key;
    std::string value;
  };
  std::map<std::string, std::vector<Entry>> sections_;
  std::vector<std::string> order_;
};

}  // namespace creepfit
