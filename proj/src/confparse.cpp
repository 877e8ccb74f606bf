#include "raptar/confparse.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace raptar {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& raw, const std::string& context) {
  const std::string v = trim(raw);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ValidationError(context + ": cannot parse number '" + raw + "'");
  }
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  Section* current = nullptr;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ValidationError(origin + ":" + std::to_string(lineno) +
                              ": malformed section header");
      }
      cfg.sections_.push_back(
          Section{trim(stripped.substr(1, stripped.size() - 2)), {}});
      current = &cfg.sections_.back();
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(lineno) +
                            ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError(origin + ":" + std::to_string(lineno) +
                            ": empty key");
    }
    if (current) {
      current->values[key] = value;
    } else {
      cfg.top_[key] = value;
    }
  }
  return cfg;
}

const std::string* ConfigFile::find(const std::string& section,
                                    const std::string& key) const {
  if (section.empty()) {
    const auto it = top_.find(key);
    return it == top_.end() ? nullptr : &it->second;
  }
  for (const auto& s : sections_) {
    if (s.name == section) {
      const auto it = s.values.find(key);
      if (it != s.values.end()) return &it->second;
    }
  }
  return nullptr;
}

void ConfigFile::fail(const std::string& what) const {
  throw ValidationError(origin_ + ": " + what);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v) fail("missing key '" + key + "' in section [" + section + "]");
  return *v;
}

std::string ConfigFile::get_string_or(const std::string& section,
                                      const std::string& key,
                                      const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key) const {
  return parse_double(get_string(section, key),
                      origin_ + " [" + section + "] " + key);
}

double ConfigFile::get_double_or(const std::string& section,
                                 const std::string& key,
                                 double fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  return parse_double(*v, origin_ + " [" + section + "] " + key);
}

long long ConfigFile::get_int(const std::string& section,
                              const std::string& key) const {
  const double d =
      parse_double(get_string(section, key), origin_ + " " + key);
  const long long out = static_cast<long long>(d);
  if (static_cast<double>(out) != d) {
    fail("key '" + key + "' is not an integer");
  }
  return out;
}

long long ConfigFile::get_int_or(const std::string& section,
                                 const std::string& key,
                                 long long fallback) const {
  if (!has(section, key)) return fallback;
  return get_int(section, key);
}

bool ConfigFile::get_bool_or(const std::string& section,
                             const std::string& key, bool fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail("key '" + key + "' is not a boolean");
  return fallback;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  std::string raw = get_string(section, key);
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
    fail("key '" + key + "' is not a bracketed list");
  }
  raw = raw.substr(1, raw.size() - 2);
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    out.push_back(
        parse_double(t, origin_ + " [" + section + "] " + key));
  }
  return out;
}

std::string format_double_list(const std::vector<double>& values) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << values[i];
  }
  os << "]";
  return os.str();
}

}  // namespace raptar
