#pragma once

#include <map>
#include <string>
#include <vector>

#include "raptar/errors.hpp"

namespace raptar {

// Flat plain-text configuration dialect shared by scan, scene, arm, and
// calibration files:
//
//   # comment
//   top_level_key = value
//   [section]
//   key = value
//   list = [1.0, 2.0, 3.0]
//
// Section names may repeat a prefix ("object:table") to describe collections.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  struct Section {
    std::string name;
    std::map<std::string, std::string> values;
  };

  // Top-level entries appear before the first section header.
  const std::map<std::string, std::string>& top_level() const {
    return top_;
  }
  const std::vector<Section>& sections() const { return sections_; }

  bool has(const std::string& section, const std::string& key) const;

  // Accessors throw ValidationError naming the file and key when missing or
  // unparsable. Empty section name addresses the top level.
  std::string get_string(const std::string& section,
                         const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int_or(const std::string& section, const std::string& key,
                       long long fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;

  const std::string& origin() const { return origin_; }

 private:
  const std::string* find(const std::string& section,
                          const std::string& key) const;
  [[noreturn]] void fail(const std::string& what) const;

  std::string origin_;
  std::map<std::string, std::string> top_;
  std::vector<Section> sections_;
};

// Serialization helpers used by writers (calibration output, scan logs).
std::string format_double_list(const std::vector<double>& values);

}  // namespace raptar
